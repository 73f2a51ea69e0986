#include "membrane/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "membrane/error.hpp"
#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// sqrt(R^2 - r^2) without cancellation near r = R.
double abel_root(double R, double r) { return std::sqrt(std::max(0.0, (R - r) * (R + r))); }

// Moments of the kernel over [a, b] for the monomials 1, r, r^2.
void kernel_moments(bool abel, double R, double a, double b, double* m) {
  if (!abel) {
    m[0] = 2.0 * (b - a);
    m[1] = b * b - a * a;
    m[2] = 2.0 * (b * b * b - a * a * a) / 3.0;
    return;
  }
  const double aa = std::asin(std::min(1.0, a / R)), ab = std::asin(std::min(1.0, b / R));
  const double sa = abel_root(R, a), sb = abel_root(R, b);
  m[0] = 2.0 * (ab - aa);
  m[1] = 2.0 * (sa - sb);
  m[2] = R * R * (ab - aa) - (b * sb - a * sa);
}

}  // namespace

// ------------------------------------------------------------------ TimeMesh

TimeMesh TimeMesh::graded(double s_min, double t, int n, double grading) {
  require_time_order(s_min, t, "time mesh");
  if (n < 3) throw Error(ErrorCode::MeshTooCoarse, "time mesh needs at least 3 intervals");
  if (!(grading >= 1.0)) throw Error(ErrorCode::InvalidInput, "mesh grading must be at least 1");
  TimeMesh m;
  m.t = t;
  m.s_min = s_min;
  m.grading = grading;
  m.s.resize(n + 1);
  m.r.resize(n + 1);
  const double T = t - s_min;
  for (int k = 0; k <= n; ++k) {
    const double frac = std::pow(static_cast<double>(k) / n, grading);
    m.s[k] = k == n ? s_min : t - T * frac;
    m.r[k] = std::sqrt(T * frac);
  }
  return m;
}

void TimeMesh::stencil(double r0, int& first, int& count, double* w) const {
  const int n = intervals();
  const auto it = std::upper_bound(r.begin(), r.end(), r0);
  int j = static_cast<int>(it - r.begin()) - 1;
  j = std::clamp(j, 0, n - 1);
  count = std::min(4, n + 1);
  first = std::clamp(j - 1, 0, n + 1 - count);
  lagrange_weights(&r[first], count, r0, w);
}

// --------------------------------------------------------------- DensityPair

DensityPair::DensityPair(TimeMesh mesh, std::vector<double> w1, std::vector<double> w2)
    : mesh_(std::move(mesh)), w1_(std::move(w1)), w2_(std::move(w2)) {
  if (w1_.size() != mesh_.s.size() || w2_.size() != mesh_.s.size())
    throw Error(ErrorCode::MeshMismatch, "density values do not match the mesh");
}

DensityPair DensityPair::zero(TimeMesh mesh) {
  const std::size_t n = mesh.s.size();
  return DensityPair(std::move(mesh), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
}

double DensityPair::W(int i, double tau) const {
  const double r0 = std::sqrt(std::max(0.0, mesh_.t - tau));
  const double rmax = mesh_.r.back();
  if (r0 > rmax * (1.0 + 1e-12) + 1e-14) throw Error(ErrorCode::MeshMismatch, "time outside the density mesh");
  const std::vector<double>& v = nodes(i);
  int first, count;
  double w[4];
  mesh_.stencil(std::min(r0, rmax), first, count, w);
  double acc = 0.0;
  for (int k = 0; k < count; ++k) acc += w[k] * v[first + k];
  return acc;
}

double DensityPair::V(int i, double tau) const {
  require_time_order(tau, mesh_.t, "density");
  return W(i, tau) / std::sqrt(mesh_.t - tau);
}

double DensityPair::max_abs() const {
  double m = 0.0;
  for (double v : w1_) m = std::max(m, std::abs(v));
  for (double v : w2_) m = std::max(m, std::abs(v));
  return m;
}

bool DensityPair::is_zero() const { return max_abs() == 0.0; }

// ------------------------------------------------------------ product weights

std::vector<double> product_weights(const std::vector<double>& rho, bool abel) {
  const int m = static_cast<int>(rho.size()) - 1;
  std::vector<double> w(rho.size(), 0.0);
  if (m < 1) return w;
  const double R = rho.back();
  if (m == 1) {
    double mo[3];
    kernel_moments(abel, R, rho[0], rho[1], mo);
    const double d = rho[1] - rho[0];
    w[0] = (rho[1] * mo[0] - mo[1]) / d;
    w[1] = (mo[1] - rho[0] * mo[0]) / d;
    return w;
  }
  for (int l = 0; l < m; ++l) {
    const int c = std::clamp(l, 1, m - 1);
    const int idx[3] = {c - 1, c, c + 1};
    double mo[3];
    kernel_moments(abel, R, rho[l], rho[l + 1], mo);
    // moments of xi = r - x_c
    const double xc = rho[c];
    const double mu0 = mo[0];
    const double mu1 = mo[1] - xc * mo[0];
    const double mu2 = mo[2] - 2.0 * xc * mo[1] + xc * xc * mo[0];
    for (int a = 0; a < 3; ++a) {
      const double xa = rho[idx[(a + 1) % 3]] - xc, xb = rho[idx[(a + 2) % 3]] - xc;
      const double xj = rho[idx[a]] - xc;
      const double den = (xj - xa) * (xj - xb);
      w[idx[a]] += (mu2 - (xa + xb) * mu1 + xa * xb * mu0) / den;
    }
  }
  return w;
}

// ---------------------------------------------------------------- Potentials

Potentials::Potentials(const Problem& p, PotentialSettings st) : problem_(p), settings_(st) {
  g1_ = std::make_unique<FundamentalSolution>(problem_, 1, settings_.parametrix);
  g2_ = std::make_unique<FundamentalSolution>(problem_, 2, settings_.parametrix);
}

double Potentials::poisson(int i, double s, double x, double t, const InitialFunction& phi, int p) const {
  require_time_order(s, t, "Poisson potential");
  const FundamentalSolution& g = G(i);
  auto psi = [&phi](double y) { return phi(y); };
  double v = g.principal_action(s, x, t, psi, p, phi.resolution(), phi.breakpoints());
  if (g.trivial()) return v;

  // One correction field per (side, t, phi) covering the audit window.
  const ParametrixSettings& ps = settings_.parametrix;
  const double reach = ps.r_cut * std::sqrt(g.b_upper() * t);
  double lo = problem_.grid.x_min, hi = problem_.grid.x_max;
  const QuadratureRule& probe = gauss_legendre(16);
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double tau = 0.5 * t * (1.0 + probe.nodes[k]);
    lo = std::min(lo, problem_.h(tau));
    hi = std::max(hi, problem_.h(tau));
    for (const Atom& a : problem_.wentzell.atoms) {
      lo = std::min(lo, a.position(tau));
      hi = std::max(hi, a.position(tau));
    }
  }
  if (x < lo || x > hi) return g.action(s, x, t, psi, p, phi.resolution());
  const double margin = ps.field_margin * reach;
  const auto key = std::make_tuple(i, t, phi.id());
  std::shared_ptr<const CorrectionField> field;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = fields_.find(key);
    if (it != fields_.end()) field = it->second;
  }
  if (!field) {
    auto built = g.terminal_field(t, 0.0, lo - margin, hi + margin, psi, phi.resolution());
    std::lock_guard<std::mutex> lock(mutex_);
    field = fields_.emplace(key, built).first->second;
  }
  return v + field->apply(s, x, p);
}

void Potentials::check_mesh(double s, double t, const DensityPair& d) const {
  require_time_order(s, t, "layer potential");
  if (std::abs(d.t() - t) > 1e-12 * (1.0 + std::abs(t)))
    throw Error(ErrorCode::MeshMismatch, "densities were solved for a different terminal time");
  if (s < d.s_min() - 1e-12 * (1.0 + std::abs(s)))
    throw Error(ErrorCode::MeshMismatch, "densities do not cover the requested start time");
}

double Potentials::layer_principal(int i, double s, double x, double t, const DensityPair& d,
                                   bool derivative) const {
  const FundamentalSolution& g = G(i);
  const int p = derivative ? 1 : 0;
  const QuadratureRule& gl = gauss_legendre(settings_.panel_nodes);
  const double T = t - s;
  const double U = std::sqrt(0.5 * T);
  CompensatedSum acc;

  // lower half: tau = s + u^2, dtau = 2u du; Z0 carries u^{-1}
  double top = U;
  for (int k = 0; k <= settings_.geometric_panels; ++k) {
    const double bottom = k == settings_.geometric_panels ? 0.0 : 0.5 * top;
    const double hw = 0.5 * (top - bottom), mid = 0.5 * (top + bottom);
    double part = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double u = mid + hw * gl.nodes[q];
      const double tau = s + u * u;
      const double y = problem_.h(tau);
      const double beta = g.b(tau, y);
      const double dy = y - x;
      const double e = std::exp(-0.5 * dy * dy / (beta * u * u));
      if (e == 0.0) continue;
      double kern = 2.0 * kInvSqrt2Pi / std::sqrt(beta) * e;
      if (p == 1) kern *= dy / (beta * u * u);
      part += gl.weights[q] * kern * d.V(i, tau);
    }
    acc.add(part * hw);
    top = bottom;
  }

  // upper half: tau = t - v^2, dtau = 2v dv; V carries v^{-1}
  const TimeMesh& mesh = d.mesh();
  std::vector<double> cuts{0.0};
  for (double r : mesh.r)
    if (r > 0.0 && r < U) cuts.push_back(r);
  cuts.push_back(U);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const double hw = 0.5 * (b - a), mid = 0.5 * (a + b);
    double part = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double v = mid + hw * gl.nodes[q];
      const double tau = t - v * v;
      part += gl.weights[q] * 2.0 * g.principal(s, x, tau, problem_.h(tau), p) * d.W(i, tau);
    }
    acc.add(part * hw);
  }
  return acc.value();
}

double Potentials::layer_correction(int i, double s, double x, double t, const DensityPair& d,
                                    bool derivative) const {
  const FundamentalSolution& g = G(i);
  if (g.trivial()) return 0.0;
  const TimeMesh& mesh = d.mesh();
  const std::vector<double>& W = d.nodes(i);
  const double rs = std::sqrt(t - s);
  const double gap = 0.25 * mesh.r.back() / mesh.intervals();
  std::vector<double> rho, f;
  for (std::size_t l = 0; l < mesh.r.size(); ++l) {
    if (mesh.r[l] > rs - gap) break;
    rho.push_back(mesh.r[l]);
    const double tau = mesh.s[l];
    // sqrt(tau - s) Z1 W, regular at both ends
    f.push_back(W[l] == 0.0 ? 0.0
                            : std::sqrt(tau - s) * g.correction(s, x, tau, problem_.h(tau), derivative ? 1 : 0) *
                                  W[l]);
  }
  rho.push_back(rs);
  if (derivative) {
    // sqrt(tau - s) dZ1/dx stays bounded but need not vanish at tau = s
    const double e = 1e-4 * (t - s);
    auto edge = [&](double dl) {
      const double tau = s + dl;
      return std::sqrt(dl) * g.correction(s, x, tau, problem_.h(tau), 1) * d.W(i, tau);
    };
    f.push_back(2.0 * edge(e) - edge(4.0 * e));
  } else {
    f.push_back(0.0);
  }
  const std::vector<double> w = product_weights(rho, true);
  CompensatedSum acc;
  for (std::size_t l = 0; l < w.size(); ++l) acc.add(w[l] * f[l]);
  return acc.value();
}

double Potentials::layer(int i, double s, double x, double t, const DensityPair& d) const {
  check_mesh(s, t, d);
  if (d.is_zero()) return 0.0;
  return layer_principal(i, s, x, t, d, false) + layer_correction(i, s, x, t, d, false);
}

double Potentials::direct_value(int i, double s, double t, const DensityPair& d) const {
  check_mesh(s, t, d);
  if (d.is_zero()) return 0.0;
  const double x = problem_.h(s);
  return layer_principal(i, s, x, t, d, true) + layer_correction(i, s, x, t, d, true);
}

std::pair<double, double> Potentials::conormal_jump(int i, double s, double t, const DensityPair& d) const {
  check_mesh(s, t, d);
  if (d.is_zero()) return {0.0, 0.0};
  const double direct = direct_value(i, s, t, d);
  const double jump = d.V(i, s) / G(i).b(s, problem_.h(s));
  return {direct + jump, direct - jump};
}

}  // namespace membrane
