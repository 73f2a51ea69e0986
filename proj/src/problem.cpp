#include "membrane/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "membrane/error.hpp"

namespace membrane {

const char* to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Membrane: return "membrane";
    case Side::Right: return "right";
  }
  return "?";
}

double Problem::d(int i, double s) const {
  const double hs = h(s);
  const double b1 = b(1, s, hs), b2 = b(2, s, hs);
  const double den = q(1, s) * std::sqrt(b2) + q(2, s) * std::sqrt(b1);
  const double bi = i == 1 ? b1 : b2;
  const double bo = i == 1 ? b2 : b1;
  return bi * std::sqrt(bo) / den;
}

double Problem::l(int j, double s) const {
  const double hs = h(s);
  const double b1 = b(1, s, hs), b2 = b(2, s, hs);
  const double den = q(1, s) * std::sqrt(b2) + q(2, s) * std::sqrt(b1);
  return j == 1 ? q(1, s) * std::sqrt(b2) / den : q(2, s) * std::sqrt(b1) / den;
}

namespace {

template <class F>
void for_grid(const Problem& p, int res, F&& f) {
  for (int is = 0; is <= res; ++is) {
    const double s = p.horizon * is / res;
    for (int ix = 0; ix <= res; ++ix) {
      const double x = p.grid.x_min + (p.grid.x_max - p.grid.x_min) * ix / res;
      f(s, x);
    }
  }
}

double sampled_min(const Problem& p, int i) {
  double m = std::numeric_limits<double>::infinity();
  for_grid(p, p.grid.resolution, [&](double s, double x) { m = std::min(m, p.b(i, s, x)); });
  for (int k = 0; k <= p.grid.resolution; ++k) {
    const double s = p.horizon * k / p.grid.resolution;
    m = std::min(m, p.b(i, s, p.h(s)));
  }
  return m;
}

double sampled_max(const Problem& p, int i) {
  double m = -std::numeric_limits<double>::infinity();
  for_grid(p, p.grid.resolution, [&](double s, double x) { m = std::max(m, p.b(i, s, x)); });
  for (int k = 0; k <= p.grid.resolution; ++k) {
    const double s = p.horizon * k / p.grid.resolution;
    m = std::max(m, p.b(i, s, p.h(s)));
  }
  return m;
}

// max over neighbouring grid pairs of |f(P) - f(P')| / (|s-s'|^{alpha/2} + |x-x'|^alpha)
double holder_quotient(const Problem& p, const CoefficientField& f, double alpha, int res) {
  const double ds = p.horizon / res;
  const double dx = (p.grid.x_max - p.grid.x_min) / res;
  double q = 0.0;
  for (int is = 0; is <= res; ++is) {
    const double s = ds * is;
    for (int ix = 0; ix <= res; ++ix) {
      const double x = p.grid.x_min + dx * ix;
      const double v = f(s, x);
      if (ix < res) q = std::max(q, std::abs(f(s, x + dx) - v) / std::pow(dx, alpha));
      if (is < res) q = std::max(q, std::abs(f(s + ds, x) - v) / std::pow(ds, alpha / 2.0));
    }
  }
  return q;
}

}  // namespace

double Problem::lower_diffusion_bound(int i) const {
  double m = sampled_min(*this, i);
  if (side(i).lower_bound) m = std::min(m, *side(i).lower_bound);
  return m;
}

double Problem::upper_diffusion_bound(int i) const {
  double m = sampled_max(*this, i);
  if (side(i).upper_bound) m = std::max(m, *side(i).upper_bound);
  return m;
}

double Problem::lower_diffusion_bound() const { return std::min(lower_diffusion_bound(1), lower_diffusion_bound(2)); }
double Problem::upper_diffusion_bound() const { return std::max(upper_diffusion_bound(1), upper_diffusion_bound(2)); }

double Problem::holder_exponent() const { return std::min(left.holder_exponent, right.holder_exponent); }

double Problem::atom_delta() const {
  if (wentzell.atoms.empty()) return std::numeric_limits<double>::infinity();
  const int res = std::max(grid.resolution, 256);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& atom : wentzell.atoms)
    for (int k = 0; k <= res; ++k) {
      const double s = horizon * k / res;
      m = std::min(m, std::abs(atom.position(s) - h(s)));
    }
  return 0.5 * m;
}

Side side_of(const Problem& p, double s, double x) { return side_of(p, s, x, p.membrane_tolerance(s)); }

Side side_of(const Problem& p, double s, double x, double tol) {
  const double hs = p.h(s);
  if (std::abs(x - hs) <= tol) return Side::Membrane;
  return x < hs ? Side::Left : Side::Right;
}

bool ValidationReport::pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.pass; });
}

ValidationReport validate(const Problem& p, int res) {
  if (res < 2) throw Error(ErrorCode::InvalidInput, "validation grid resolution must be >= 2");
  if (!(p.horizon > 0)) throw Error(ErrorCode::InvalidInput, "horizon must be positive");
  ValidationReport r;
  Problem grid_p = p;
  grid_p.grid.resolution = res;

  // I: uniform parabolicity
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (int i = 1; i <= 2; ++i) {
    const double lo = sampled_min(grid_p, i), hi = sampled_max(grid_p, i);
    if (!(lo > 0.0) || !std::isfinite(hi))
      throw Error(ErrorCode::NonparabolicCoefficient,
                  std::string(i == 1 ? "left" : "right") + ".diffusion has a sample <= 0 (min " + std::to_string(lo) + ")");
    smin = std::min(smin, lo);
    smax = std::max(smax, hi);
  }
  bool declared_ok = true;
  double declared_lo = smin, declared_hi = smax;
  for (int i = 1; i <= 2; ++i) {
    const SideSpec& sp = p.side(i);
    const double lo = sampled_min(grid_p, i), hi = sampled_max(grid_p, i);
    if (sp.lower_bound) {
      declared_ok = declared_ok && *sp.lower_bound > 0 && lo >= *sp.lower_bound;
      declared_lo = std::min(declared_lo, *sp.lower_bound);
    }
    if (sp.upper_bound) {
      declared_ok = declared_ok && hi <= *sp.upper_bound;
      declared_hi = std::max(declared_hi, *sp.upper_bound);
    }
  }
  r.b = declared_lo;
  r.B = declared_hi;
  r.conditions.push_back({"I", "diffusion bounded between declared b and B", smin, declared_lo, declared_ok});

  // II: Hoelder continuity of the coefficients (sampled quotient must be finite)
  const double alpha = p.holder_exponent();
  double qa = 0.0, qb = 0.0;
  for (int i = 1; i <= 2; ++i) {
    qa = std::max(qa, holder_quotient(grid_p, p.side(i).drift, p.side(i).holder_exponent, res));
    qb = std::max(qb, holder_quotient(grid_p, p.side(i).diffusion, p.side(i).holder_exponent, res));
  }
  r.holder_a = qa;
  r.holder_b = qb;
  const bool alpha_ok = alpha > 0.0 && alpha < 1.0;
  r.conditions.push_back({"II", "sampled Hoelder quotient of a_i, b_i", std::max(qa, qb), alpha,
                          alpha_ok && std::isfinite(qa) && std::isfinite(qb)});

  // III: checked only when phi is supplied
  r.conditions.push_back({"III", "initial function bounded and continuous (not supplied)", 0.0, 0.0, true});

  // IV: Wentzell data
  double q0 = std::numeric_limits<double>::infinity();
  double min_q = q0, min_w = q0, max_moment = 0.0;
  for (int k = 0; k <= res; ++k) {
    const double s = p.horizon * k / res;
    const double q1 = p.q(1, s), q2 = p.q(2, s);
    min_q = std::min({min_q, q1, q2});
    q0 = std::min(q0, q1 + q2);
    if (!(q1 + q2 > 0.0))
      throw Error(ErrorCode::DegenerateWentzell, "wentzell.q1 + wentzell.q2 vanishes at s=" + std::to_string(s));
    double moment = 0.0;
    for (std::size_t a = 0; a < p.wentzell.atoms.size(); ++a) {
      const Atom& atom = p.wentzell.atoms[a];
      const double y = atom.position(s), w = atom.weight(s);
      if (std::abs(y - p.h(s)) <= p.membrane_tolerance(s))
        throw Error(ErrorCode::AtomOnMembrane,
                    "wentzell.atoms[" + std::to_string(a) + "] lies on the membrane at s=" + std::to_string(s));
      min_w = std::min(min_w, w);
      moment += std::abs(y - p.h(s)) * w;
    }
    max_moment = std::max(max_moment, moment);
  }
  r.q0 = q0;
  r.max_moment = max_moment;
  const bool weights_ok = p.wentzell.atoms.empty() || min_w >= 0.0;
  r.conditions.push_back({"IV", "q_i >= 0, q1+q2 >= q0 > 0, atom weights >= 0", q0, 0.0,
                          q0 > 0.0 && min_q >= 0.0 && weights_ok});

  // V: membrane Hoelder-(1+alpha)/2 over all grid pairs
  const double ex = 0.5 * (1.0 + alpha);
  double qh = 0.0;
  std::vector<double> hs(res + 1);
  for (int k = 0; k <= res; ++k) hs[k] = p.h(p.horizon * k / res);
  for (int k = 0; k <= res; ++k)
    for (int m = k + 1; m <= res; ++m)
      qh = std::max(qh, std::abs(hs[m] - hs[k]) / std::pow(p.horizon * (m - k) / res, ex));
  r.holder_h = qh;
  bool finite_h = std::all_of(hs.begin(), hs.end(), [](double v) { return std::isfinite(v); });
  r.conditions.push_back({"V", "sampled Hoelder-(1+alpha)/2 quotient of h", qh, ex, finite_h && std::isfinite(qh)});
  return r;
}

ValidationReport validate(const Problem& p, int res, const InitialFunction& phi) {
  ValidationReport r = validate(p, res);
  double m = 0.0;
  bool finite = true;
  const int n = 4 * res;
  const double lo = p.grid.x_min - 5.0, hi = p.grid.x_max + 5.0;
  for (int k = 0; k <= n; ++k) {
    const double v = phi(lo + (hi - lo) * k / n);
    finite = finite && std::isfinite(v);
    m = std::max(m, std::abs(v));
  }
  for (auto& c : r.conditions)
    if (c.condition == "III") {
      c.description = "initial function bounded by its sup norm";
      c.statistic = m;
      c.threshold = phi.sup_norm();
      c.pass = finite && m <= phi.sup_norm() * (1.0 + 1e-12) + 1e-300;
    }
  return r;
}

}  // namespace membrane
