#include "membrane/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "membrane/error.hpp"
#include "membrane/parallel.hpp"
#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

void require_no_measure(const Problem& p, const char* where) {
  if (!p.wentzell.atoms.empty())
    throw Error(ErrorCode::MeasureNotNull, std::string(where) + " requires an empty measure");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Nodes and weights of int_lo^hi g dx split at the membrane.
struct PairingRule {
  std::vector<double> x, w;
};

PairingRule pairing_rule(double lo, double hi, double h, int panels, int nodes) {
  PairingRule r;
  const QuadratureRule& gl = gauss_legendre(nodes);
  std::vector<std::pair<double, double>> pieces;
  if (h > lo && h < hi) {
    pieces = {{lo, h}, {h, hi}};
  } else {
    pieces = {{lo, hi}};
  }
  for (auto [a, b] : pieces) {
    const double width = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
      const double pa = a + k * width, hw = 0.5 * width, mid = pa + hw;
      for (std::size_t q = 0; q < gl.size(); ++q) {
        r.x.push_back(mid + hw * gl.nodes[q]);
        r.w.push_back(hw * gl.weights[q]);
      }
    }
  }
  return r;
}

// (clamp(y, lo, hi) - c)^k expanded in powers of y.
InitialFunction clamped_power(double lo, double hi, double c, int k) {
  std::vector<double> coeffs(static_cast<std::size_t>(k + 1), 0.0);
  double binom = 1.0;
  for (int m = 0; m <= k; ++m) {
    coeffs[static_cast<std::size_t>(m)] = binom * std::pow(-c, k - m);
    binom = binom * (k - m) / (m + 1);
  }
  return InitialFunction::polynomial_clamped(lo, hi, coeffs);
}

}  // namespace

// ------------------------------------------------------------- coefficients

EffectiveCoefficients::EffectiveCoefficients(const Problem& p) : p_(p) {}

double EffectiveCoefficients::a0(double s) const {
  return 0.5 * (p_.d(1, s) + p_.d(2, s)) * (p_.q(2, s) - p_.q(1, s));
}

double EffectiveCoefficients::b(double s, double x) const {
  switch (side_of(p_, s, x)) {
    case Side::Left:
      return p_.b(1, s, x);
    case Side::Right:
      return p_.b(2, s, x);
    default: {
      const double h = p_.h(s);
      return l(1, s) * p_.b(1, s, h) + l(2, s) * p_.b(2, s, h);
    }
  }
}

double EffectiveCoefficients::a(double s, double x) const {
  switch (side_of(p_, s, x)) {
    case Side::Left:
      return p_.a(1, s, x);
    case Side::Right:
      return p_.a(2, s, x);
    default: {
      const double h = p_.h(s);
      return l(1, s) * p_.a(1, s, h) + l(2, s) * p_.a(2, s, h);
    }
  }
}

EffectiveValues effective_coefficients(const Problem& p, double s, double x) {
  require_no_measure(p, "effective coefficients");
  EffectiveCoefficients c(p);
  return {c.b(s, x), c.a(s, x), c.a0(s)};
}

double side_generator(const Problem& p, int i, double s, double x, const InitialFunction& phi) {
  return 0.5 * p.b(i, s, x) * phi.derivative(x, 2) + p.a(i, s, x) * phi.derivative(x, 1);
}

double generator_L(const Problem& p, double s, double x, const InitialFunction& phi) {
  switch (side_of(p, s, x)) {
    case Side::Left:
      return side_generator(p, 1, s, x, phi);
    case Side::Right:
      return side_generator(p, 2, s, x, phi);
    default:
      return p.l(1, s) * side_generator(p, 1, s, x, phi) + p.l(2, s) * side_generator(p, 2, s, x, phi);
  }
}

TestFunction TestFunction::bump(double center, double radius) {
  TestFunction t;
  t.lo = center - radius;
  t.hi = center + radius;
  t.f = [center, radius](double x) {
    const double z = (x - center) / radius;
    if (std::abs(z) >= 1.0) return 0.0;
    const double v = 1.0 - z * z;
    return v * v;
  };
  return t;
}

// ----------------------------------------------------------------- operator

SemigroupOperator::SemigroupOperator(const Problem& p, SemigroupSettings st)
    : sys_(p, st.solver), settings_(st) {}

std::shared_ptr<const DensityPair> SemigroupOperator::densities(double s_min, double t,
                                                                const InitialFunction& phi) const {
  const auto key = std::make_tuple(s_min, t, phi.id());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  auto d = std::make_shared<const DensityPair>(sys_.solve_densities(phi, t, s_min));
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.emplace(key, d).first->second;
}

std::size_t SemigroupOperator::memo_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.size();
}

double SemigroupOperator::side_value(int i, double s, double x, double t, const InitialFunction& phi) const {
  if (s == t) return phi(x);
  require_time_order(s, t, "semigroup");
  const auto d = densities(s, t, phi);
  return sys_.potentials().poisson(i, s, x, t, phi) + sys_.potentials().layer(i, s, x, t, *d);
}

double SemigroupOperator::value(double s, double x, double t, const InitialFunction& phi) const {
  if (s == t) return phi(x);
  const int i = side_of(problem(), s, x) == Side::Right ? 2 : 1;
  return side_value(i, s, x, t, phi);
}

std::function<double(double)> SemigroupOperator::apply(double s, double t, const InitialFunction& phi) const {
  if (s != t) {
    require_time_order(s, t, "semigroup");
    densities(s, t, phi);
  }
  return [this, s, t, phi](double x) { return value(s, x, t, phi); };
}

std::vector<double> SemigroupOperator::apply(double s, double t, const InitialFunction& phi,
                                             const std::vector<double>& xs) const {
  if (s != t) {
    require_time_order(s, t, "semigroup");
    densities(s, t, phi);
  }
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t k) { out[k] = value(s, xs[k], t, phi); });
  return out;
}

std::vector<double> SemigroupOperator::audit_grid() const {
  const ValidationGrid& g = problem().grid;
  const int n = std::max(g.resolution, 1);
  std::vector<double> xs(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) xs[static_cast<std::size_t>(k)] = g.x_min + (g.x_max - g.x_min) * k / n;
  return xs;
}

InitialFunction SemigroupOperator::retabulate(double s, double tau, double t, const InitialFunction& phi) const {
  const Problem& p = problem();
  const ValidationGrid& g = p.grid;
  const double margin = settings_.retab_window * std::sqrt(p.upper_diffusion_bound() * std::max(tau - s, 0.0));
  const double lo = g.x_min - margin, hi = g.x_max + margin;
  const double dx = settings_.retab_spacing;
  const double h = p.h(tau);
  std::vector<double> xs;
  std::vector<int> breaks;
  if (h > lo + dx && h < hi - dx) {
    for (double x = h; x > lo; x -= dx) xs.push_back(x);
    xs.push_back(lo);
    std::reverse(xs.begin(), xs.end());
    breaks.push_back(static_cast<int>(xs.size()) - 1);
    const int right = static_cast<int>(std::ceil((hi - h) / dx));
    for (int k = 1; k < right; ++k) xs.push_back(h + k * dx);
    xs.push_back(hi);
  } else {
    const int n = static_cast<int>(std::ceil((hi - lo) / dx));
    for (int k = 0; k <= n; ++k) xs.push_back(lo + (hi - lo) * k / n);
  }
  // drop a node closer than dx/4 to its neighbour at the window ends
  if (xs.size() > 2 && xs[1] - xs[0] < 0.25 * dx && (breaks.empty() || breaks[0] != 1)) {
    xs.erase(xs.begin() + 1);
    for (int& b : breaks) --b;
  }
  if (xs.size() > 2 && xs.back() - xs[xs.size() - 2] < 0.25 * dx &&
      (breaks.empty() || breaks[0] != static_cast<int>(xs.size()) - 2))
    xs.erase(xs.end() - 2);
  std::vector<double> values = apply(tau, t, phi, xs);
  return InitialFunction::tabulated(xs, values, breaks);
}

ChapmanKolmogorov SemigroupOperator::check_chapman_kolmogorov(double s, double tau, double t,
                                                              const InitialFunction& phi) const {
  if (!(s <= tau && tau <= t && s < t))
    throw Error(ErrorCode::TimeOrder, "Chapman-Kolmogorov requires s <= tau <= t and s < t");
  const std::vector<double> grid = audit_grid();
  const std::vector<double> direct = apply(s, t, phi, grid);
  const InitialFunction mid = retabulate(s, tau, t, phi);
  const std::vector<double> composed = apply(s, tau, mid, grid);
  ChapmanKolmogorov r;
  for (std::size_t k = 0; k < grid.size(); ++k) r.discrepancy = std::max(r.discrepancy, std::abs(direct[k] - composed[k]));
  r.retab_spacing = settings_.retab_spacing;
  r.retab_nodes = static_cast<int>(mid.table_x().size());
  return r;
}

PositivityContraction SemigroupOperator::check_positivity_contraction(double s, double t,
                                                                      const InitialFunction& phi) const {
  const std::vector<double> v = apply(s, t, phi, audit_grid());
  PositivityContraction r;
  r.min_value = *std::min_element(v.begin(), v.end());
  r.sup_norm = max_abs(v);
  r.phi_norm = phi.sup_norm();
  return r;
}

double SemigroupOperator::check_conservation(double s, double t) const {
  const std::vector<double> v = apply(s, t, InitialFunction::constant_one(), audit_grid());
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x - 1.0));
  return m;
}

Conjugation SemigroupOperator::check_conjugation(double s, double t, const InitialFunction& phi) const {
  require_time_order(s, t, "conjugation check");
  const Problem& p = problem();
  const Potentials& pot = sys_.potentials();
  const auto d = densities(s, t, phi);
  const TimeMesh& mesh = d->mesh();
  const std::size_t n = mesh.s.size() - 1;
  Conjugation r;
  r.phi_norm = phi.sup_norm();
  r.s.assign(mesh.s.begin() + 1, mesh.s.end());
  r.b1_nodes.assign(n, 0.0);
  r.b2_nodes.assign(n, 0.0);
  parallel_for(n, [&](std::size_t idx) {
    const double sk = mesh.s[idx + 1];
    const double h = p.h(sk);
    const double u1 = pot.poisson(1, sk, h, t, phi) + pot.layer(1, sk, h, t, *d);
    const double u2 = pot.poisson(2, sk, h, t, phi) + pot.layer(2, sk, h, t, *d);
    const double du1 = pot.poisson(1, sk, h, t, phi, 1) + pot.conormal_jump(1, sk, t, *d).first;
    const double du2 = pot.poisson(2, sk, h, t, phi, 1) + pot.conormal_jump(2, sk, t, *d).second;
    double b2 = p.q(1, sk) * du1 - p.q(2, sk) * du2;
    for (const Atom& a : p.wentzell.atoms) {
      const double w = a.weight(sk);
      if (w == 0.0) continue;
      const int i = p.atom_side(a, sk);
      const double y = a.position(sk);
      const double uh = i == 1 ? u1 : u2;
      b2 += w * (uh - (pot.poisson(i, sk, y, t, phi) + pot.layer(i, sk, y, t, *d)));
    }
    r.b1_nodes[idx] = u1 - u2;
    r.b2_nodes[idx] = b2;
  });
  r.b1 = max_abs(r.b1_nodes);
  r.b2 = max_abs(r.b2_nodes);
  return r;
}

std::vector<double> SemigroupOperator::check_continuity(double s, double t, const std::vector<InitialFunction>& seq,
                                                        const InitialFunction& limit) const {
  const std::vector<double> grid = audit_grid();
  const std::vector<double> target = apply(s, t, limit, grid);
  std::vector<double> out;
  for (const InitialFunction& f : seq) {
    const std::vector<double> v = apply(s, t, f, grid);
    double m = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) m = std::max(m, std::abs(v[k] - target[k]));
    out.push_back(m);
  }
  return out;
}

WeakGenerator SemigroupOperator::weak_generator_pairing(double s, const InitialFunction& phi, const TestFunction& f,
                                                        const std::vector<double>& dts) const {
  const Problem& p = problem();
  const double h = p.h(s);
  const PairingRule rule = pairing_rule(f.lo, f.hi, h, settings_.pairing_panels, settings_.pairing_nodes);
  WeakGenerator r;
  for (std::size_t k = 0; k < rule.x.size(); ++k)
    r.bulk += rule.w[k] * f.f(rule.x[k]) * generator_L(p, s, rule.x[k], phi);
  double jump = (p.q(2, s) - p.q(1, s)) * phi.derivative(h, 1);
  for (const Atom& a : p.wentzell.atoms) jump += a.weight(s) * (phi(a.position(s)) - phi(h));
  r.boundary = 0.5 * (p.d(1, s) + p.d(2, s)) * jump * f.f(h);
  r.rhs = r.bulk + r.boundary;
  for (double dt : dts) {
    if (!(dt > 0.0) || s + dt > p.horizon) throw Error(ErrorCode::InvalidInput, "weak generator: bad dt");
    const std::vector<double> v = apply(s, s + dt, phi, rule.x);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) acc += rule.w[k] * f.f(rule.x[k]) * (v[k] - phi(rule.x[k])) / dt;
    r.dt.push_back(dt);
    r.lhs.push_back(acc);
  }
  return r;
}

DomainCheck SemigroupOperator::generator_domain_check(double s, const InitialFunction& phi,
                                                      const std::vector<double>& dts) const {
  return generator_domain_check(s, phi, dts, audit_grid());
}

DomainCheck SemigroupOperator::generator_domain_check(double s, const InitialFunction& phi,
                                                      const std::vector<double>& dts,
                                                      const std::vector<double>& xs) const {
  const Problem& p = problem();
  const double h = p.h(s);
  DomainCheck r;
  r.residual_1 = std::abs(side_generator(p, 1, s, h, phi) - side_generator(p, 2, s, h, phi));
  double res2 = (p.q(2, s) - p.q(1, s)) * phi.derivative(h, 1);
  for (const Atom& a : p.wentzell.atoms) res2 += a.weight(s) * (phi(a.position(s)) - phi(h));
  r.residual_2 = std::abs(res2);
  r.in_domain = r.residual_1 <= settings_.tol_dom && r.residual_2 <= settings_.tol_dom;
  r.dt = dts;
  r.x = xs;
  if (!r.in_domain) return r;
  std::vector<double> target(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) target[k] = generator_L(p, s, xs[k], phi);
  for (double dt : dts) {
    if (!(dt > 0.0) || s + dt > p.horizon) throw Error(ErrorCode::InvalidInput, "generator check: bad dt");
    const std::vector<double> v = apply(s, s + dt, phi, xs);
    std::vector<double> q(xs.size());
    double err = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      q[k] = (v[k] - phi(xs[k])) / dt;
      err = std::max(err, std::abs(q[k] - target[k]));
    }
    r.quotient.push_back(std::move(q));
    r.sup_error.push_back(err);
  }
  return r;
}

Moments SemigroupOperator::transition_moments(double s, double x, double t) const {
  require_no_measure(problem(), "transition moments");
  require_time_order(s, t, "transition moments");
  const double sigma = std::sqrt(problem().upper_diffusion_bound() * (t - s));
  const double lo = x - 6.0 * sigma, hi = x + 6.0 * sigma;
  Moments m;
  m.mean = value(s, x, t, clamped_power(lo, hi, x, 1));
  m.second = value(s, x, t, clamped_power(lo, hi, x, 2));
  m.fourth = value(s, x, t, clamped_power(lo, hi, x, 4));
  return m;
}

MomentLimits SemigroupOperator::moment_limits(double s, double dt, const TestFunction& f) const {
  const Problem& p = problem();
  require_no_measure(p, "moment limits");
  const double t = s + dt;
  require_time_order(s, t, "moment limits");
  const double sigma = std::sqrt(p.upper_diffusion_bound() * dt);
  const double lo = f.lo - 6.0 * sigma, hi = f.hi + 6.0 * sigma;
  const double h = p.h(s);
  const PairingRule rule = pairing_rule(f.lo, f.hi, h, settings_.pairing_panels, settings_.pairing_nodes);
  // T applied to clamp(y)^m, m = 0..2; (y - x)^k follows by the binomial expansion at each x
  std::vector<std::vector<double>> pw;
  for (int m = 0; m <= 2; ++m) pw.push_back(apply(s, t, clamped_power(lo, hi, 0.0, m), rule.x));
  EffectiveCoefficients c(p);
  MomentLimits r;
  r.dt = dt;
  for (std::size_t k = 0; k < rule.x.size(); ++k) {
    const double x = rule.x[k];
    const double mean = pw[1][k] - x * pw[0][k];
    const double second = pw[2][k] - 2.0 * x * pw[1][k] + x * x * pw[0][k];
    const double wf = rule.w[k] * f.f(x);
    r.mean_pairing += wf * mean / dt;
    r.second_pairing += wf * second / dt;
    r.drift_target += wf * c.a(s, x);
    r.diffusion_target += wf * c.b(s, x);
  }
  r.drift_target += c.a0(s) * f.f(h);
  return r;
}

}  // namespace membrane
