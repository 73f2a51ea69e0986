#include "membrane/boundary_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "membrane/error.hpp"
#include "membrane/parallel.hpp"
#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// int_0^1 exp(-c A(theta)) dtheta for A linear in theta from a0 to a1.
double theta_integral(double c, double a0, double a1) {
  const double x = c * std::abs(a1 - a0);
  const double base = std::exp(-c * std::min(a0, a1));
  if (x < 1e-12) return base;
  return base * -std::expm1(-x) / x;
}

// f(rho) for rho in [lo, tau], sampled at r = sqrt(tau - rho) on the nodes (m + 1/2) dr, cubic in r.
class RadialTable {
 public:
  RadialTable(const std::function<double(double)>& f, double tau, double lo, int nodes) : tau_(tau) {
    const int n = std::max(nodes, 4);
    dr_ = std::sqrt(tau - lo) / (n - 0.5);
    f_.resize(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const double r = (m + 0.5) * dr_;
      f_[static_cast<std::size_t>(m)] = f(tau - r * r);
    }
  }
  double operator()(double rho) const {
    const double x = std::sqrt(std::max(tau_ - rho, 0.0)) / dr_ - 0.5;
    const int n = static_cast<int>(f_.size());
    const int i0 = std::clamp(static_cast<int>(std::floor(x)) - 1, 0, n - 4);
    const double u = x - i0;
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0, l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0, l3 = u * (u - 1) * (u - 2) / 6.0;
    const double* f = f_.data() + i0;
    return l0 * f[0] + l1 * f[1] + l2 * f[2] + l3 * f[3];
  }
  double tau() const { return tau_; }

 private:
  double tau_, dr_ = 0.0;
  std::vector<double> f_;
};

}  // namespace

// ------------------------------------------------------------------ Holmgren

double holmgren(const std::function<double(double)>& f, double s, double t, int lower_panels, int upper_panels,
                int nodes, double scale) {
  require_time_order(s, t, "Holmgren operator");
  const QuadratureRule& gl = gauss_legendre(nodes);
  const double T = t - s;
  const double U = std::sqrt(0.5 * T);
  const double fs = f(s);
  const double noise = 1e-13 * std::max(std::abs(scale), std::abs(fs));
  auto increment = [&](double rho) { return f(rho) - fs; };

  // rho = s + u^2 on the lower half
  std::vector<double> contrib, noise_bound;
  double lower = 0.0;
  double top = U;
  for (int k = 0; k <= lower_panels; ++k) {
    const double bottom = k == lower_panels ? 0.0 : 0.5 * top;
    const double hw = 0.5 * (top - bottom), mid = 0.5 * (top + bottom);
    double part = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double u = mid + hw * gl.nodes[q];
      part += gl.weights[q] * 2.0 * increment(s + u * u) / (u * u);
    }
    part *= hw;
    if (k < lower_panels) {
      contrib.push_back(part);
      noise_bound.push_back(200.0 * noise * (1.0 / bottom - 1.0 / top));
    }
    lower += part;
    top = bottom;
  }
  if (contrib.size() >= 4) {
    double biggest = 0.0;
    for (double c : contrib) biggest = std::max(biggest, std::abs(c));
    const std::size_t n = contrib.size();
    const double c1 = std::abs(contrib[n - 1]), c2 = std::abs(contrib[n - 2]), c3 = std::abs(contrib[n - 3]);
    if (c1 > 1e-4 * biggest && c1 > noise_bound[n - 1] && c1 >= 0.97 * c2 && c2 >= 0.97 * c3)
      throw Error(ErrorCode::SingularIntegrand,
                  "increment of the Holmgren integrand does not decay fast enough at the lower endpoint");
  }

  // rho = t - v^2 on the upper half
  double upper = 0.0;
  top = U;
  for (int k = 0; k <= upper_panels; ++k) {
    const double bottom = k == upper_panels ? 0.0 : 0.5 * top;
    const double hw = 0.5 * (top - bottom), mid = 0.5 * (top + bottom);
    double part = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double v = mid + hw * gl.nodes[q];
      const double rho = t - v * v;
      const double d = rho - s;
      part += gl.weights[q] * 2.0 * v * increment(rho) / (d * std::sqrt(d));
    }
    upper += part * hw;
    top = bottom;
  }
  if (!std::isfinite(lower + upper)) throw Error(ErrorCode::SingularIntegrand, "Holmgren integral is not finite");
  return kInvSqrt2Pi * (lower + upper) - 2.0 * kInvSqrt2Pi / std::sqrt(T) * fs;
}

// ------------------------------------------------------------ BoundarySystem

BoundarySystem::BoundarySystem(const Problem& p, SolverSettings st) : pot_(p, st.potentials), settings_(st) {
  const Problem& pr = pot_.problem();
  if (!pr.has_atoms())
    delta_ = std::numeric_limits<double>::infinity();
  else
    delta_ = settings_.delta > 0.0 ? settings_.delta : pr.atom_delta();
  if (pr.has_atoms()) {
    const int res = std::max(pr.grid.resolution, 256);
    double q0 = std::numeric_limits<double>::infinity(), worst = 0.0;
    for (int k = 0; k <= res; ++k) {
      const double s = pr.horizon * k / res;
      q0 = std::min(q0, pr.q(1, s) + pr.q(2, s));
      double sum = 0.0;
      for (const Atom& a : pr.wentzell.atoms) {
        const double y = a.position(s);
        if (near(s, y)) sum += std::abs(y - pr.h(s)) * a.weight(s);
      }
      worst = std::max(worst, sum);
    }
    const double ratio = pr.upper_diffusion_bound() / pr.lower_diffusion_bound();
    m_delta_ = ratio * ratio * std::numbers::pi / (2.0 * q0) * worst;
  }
}

bool BoundarySystem::near(double s, double y) const { return std::abs(y - problem().h(s)) < delta_; }

double BoundarySystem::rhs_phi0(double s, double t, const InitialFunction& phi) const {
  const double h = problem().h(s);
  return pot_.poisson(2, s, h, t, phi) - pot_.poisson(1, s, h, t, phi);
}

double BoundarySystem::rhs_psi(double s, double t, const InitialFunction& phi) const {
  const Problem& p = problem();
  const double h = p.h(s);
  double v = p.q(2, s) * pot_.poisson(2, s, h, t, phi, 1) - p.q(1, s) * pot_.poisson(1, s, h, t, phi, 1);
  for (const Atom& a : p.wentzell.atoms) {
    const double w = a.weight(s);
    if (w == 0.0) continue;
    const int i = p.atom_side(a, s);
    v += w * (pot_.poisson(i, s, a.position(s), t, phi) - pot_.poisson(i, s, h, t, phi));
  }
  return v;
}

double BoundarySystem::rhs_phi(double s, double t, const InitialFunction& phi) const {
  auto f = [&](double rho) { return rho < t ? rhs_phi0(rho, t, phi) : 0.0; };
  return holmgren(f, s, t, settings_.holmgren_lower_panels, settings_.holmgren_upper_panels,
                  settings_.holmgren_nodes, phi.sup_norm());
}

RightHandSide BoundarySystem::rhs(const TimeMesh& mesh, const InitialFunction& phi) const {
  const Problem& p = problem();
  const std::size_t n = mesh.s.size();
  RightHandSide r;
  r.mesh = mesh;
  r.phi0.assign(n, 0.0);
  r.psi.assign(n, 0.0);
  r.phi.assign(n, 0.0);
  r.psi1.assign(n, 0.0);
  r.psi2.assign(n, 0.0);
  const double t = mesh.t;
  const RadialTable phi0([&](double rho) { return rho < t ? rhs_phi0(rho, t, phi) : 0.0; }, t, mesh.s.back(),
                         settings_.table_nodes);
  parallel_for(n - 1, [&](std::size_t idx) {
    const std::size_t k = idx + 1;
    const double s = mesh.s[k];
    r.phi0[k] = rhs_phi0(s, t, phi);
    r.psi[k] = rhs_psi(s, t, phi);
    r.phi[k] = holmgren(phi0, s, t, settings_.holmgren_lower_panels, settings_.holmgren_upper_panels,
                        settings_.holmgren_nodes, phi.sup_norm());
    const double h = p.h(s);
    for (int i : {1, 2}) {
      const int o = 3 - i;
      const double sign = i == 1 ? -1.0 : 1.0;
      const double v = p.d(i, s) * (r.psi[k] + sign * p.q(o, s) / std::sqrt(p.b(o, s, h)) * r.phi[k]);
      (i == 1 ? r.psi1 : r.psi2)[k] = v;
    }
  });
  for (std::size_t k = 1; k < n; ++k)
    r.sup_scaled = std::max(r.sup_scaled, mesh.r[k] * (std::abs(r.phi[k]) + std::abs(r.psi[k])));
  return r;
}

double BoundarySystem::kernel_K(int j, double s, double tau) const {
  require_time_order(s, tau, "kernel K");
  const Problem& p = problem();
  const FundamentalSolution& g = pot_.G(j);
  const double hs = p.h(s), ht = p.h(tau);
  const double sign = j == 1 ? -1.0 : 1.0;
  double v = sign * p.q(j, s) * g.eval(s, hs, tau, ht, 1);
  double g_h = std::numeric_limits<double>::quiet_NaN();
  for (const Atom& a : p.wentzell.atoms) {
    if (p.atom_side(a, s) != j) continue;
    const double w = a.weight(s);
    if (w == 0.0) continue;
    if (std::isnan(g_h)) g_h = g.eval(s, hs, tau, ht);
    v += w * (g.eval(s, a.position(s), tau, ht) - g_h);
  }
  return v;
}

double BoundarySystem::kernel_K_regular(int j, double s, double tau) const {
  const Problem& p = problem();
  const FundamentalSolution& g = pot_.G(j);
  const double hs = p.h(s), ht = p.h(tau);
  const double sign = j == 1 ? -1.0 : 1.0;
  double v = sign * p.q(j, s) * g.eval(s, hs, tau, ht, 1);
  double g_h = std::numeric_limits<double>::quiet_NaN(), z1_h = std::numeric_limits<double>::quiet_NaN();
  const double u = tau - s;
  const double beta = g.b(tau, ht);
  for (const Atom& a : p.wentzell.atoms) {
    if (p.atom_side(a, s) != j) continue;
    const double w = a.weight(s);
    if (w == 0.0) continue;
    const double y = a.position(s);
    if (!near(s, y)) {
      if (std::isnan(g_h)) g_h = g.eval(s, hs, tau, ht);
      v += w * (g.eval(s, y, tau, ht) - g_h);
      continue;
    }
    if (!g.trivial()) {
      if (std::isnan(z1_h)) z1_h = g.correction(s, hs, tau, ht);
      v += w * (g.correction(s, y, tau, ht) - z1_h);
    }
    const double c = 1.0 / (2.0 * beta * u);
    const double th = theta_integral(c, (y - ht) * (y - ht), (hs - ht) * (hs - ht));
    v += (ht - hs) * kInvSqrt2Pi / std::pow(beta * u, 1.5) * w * (y - hs) * th;
  }
  return v;
}

std::function<double(double)> BoundarySystem::r_integrand(int j, double tau) const {
  const Problem& p = problem();
  const FundamentalSolution& g = pot_.G(j);
  const double ht = p.h(tau);
  const double beta = g.b(tau, ht);
  // F(rho) = G_j(rho, h(rho), tau, h(tau)) - Z_j0(rho, h(tau), tau, h(tau))
  return [&p, &g, tau, ht, beta](double rho) {
    if (!(rho < tau)) return 0.0;
    const double dh = p.h(rho) - ht;
    const double v = beta * (tau - rho);
    double f = kInvSqrt2Pi / std::sqrt(v) * std::expm1(-0.5 * dh * dh / v);
    if (!g.trivial()) f += g.correction(rho, p.h(rho), tau, ht);
    return f;
  };
}

bool BoundarySystem::r_vanishes(int j) const { return pot_.G(j).trivial() && problem().membrane.is_constant(); }

double BoundarySystem::kernel_R(int j, double s, double tau) const {
  require_time_order(s, tau, "kernel R");
  if (r_vanishes(j)) return 0.0;
  const double sign = j == 1 ? -1.0 : 1.0;
  return sign * holmgren(r_integrand(j, tau), s, tau, settings_.holmgren_lower_panels,
                         settings_.holmgren_upper_panels, settings_.holmgren_nodes);
}

double BoundarySystem::kernel_N1(int i, int j, double s, double tau) const {
  const Problem& p = problem();
  const int o = 3 - i;
  const double sign = i == 1 ? -1.0 : 1.0;
  const double c = sign * p.q(o, s) / std::sqrt(p.b(o, s, p.h(s)));
  return p.d(i, s) * (kernel_K_regular(j, s, tau) + c * kernel_R(j, s, tau));
}

KernelN BoundarySystem::kernel_N(int i, int j, double s, double tau) const {
  require_time_order(s, tau, "kernel N");
  KernelN k;
  k.regular = kernel_N1(i, j, s, tau);
  const Problem& p = problem();
  const FundamentalSolution& g = pot_.G(j);
  const double hs = p.h(s), ht = p.h(tau);
  const double beta = g.b(tau, ht);
  const double u = tau - s;
  k.singular.prefactor = -p.d(i, s) * 0.5 * kInvSqrt2Pi / std::pow(beta * u, 1.5);
  double acc = 0.0;
  for (const Atom& a : p.wentzell.atoms) {
    if (p.atom_side(a, s) != j) continue;
    const double y = a.position(s);
    if (!near(s, y)) continue;
    const double w = a.weight(s) * (y - hs) * (y - hs);
    k.singular.moment += w;
    acc += w * theta_integral(1.0 / (2.0 * beta * u), (y - ht) * (y - ht), (hs - ht) * (hs - ht));
  }
  k.singular.value = k.singular.prefactor * acc;
  return k;
}

double BoundarySystem::singular_action(int j, double s, const DensityPair& d) const {
  const Problem& p = problem();
  const FundamentalSolution& g = pot_.G(j);
  const double t = d.t();
  const double T = t - s;
  const double hs = p.h(s);
  struct NearAtom {
    double y, w, dy2;
  };
  std::vector<NearAtom> atoms;
  for (const Atom& a : p.wentzell.atoms) {
    if (p.atom_side(a, s) != j) continue;
    const double y = a.position(s);
    const double w = a.weight(s);
    if (w == 0.0 || !near(s, y)) continue;
    atoms.push_back({y, w, (y - hs) * (y - hs)});
  }
  if (atoms.empty()) return 0.0;
  // tau = s + T sin^2(phi): (tau - s)^{-1/2} (t - tau)^{-1/2} d tau = 2 d phi
  auto integrand = [&](double phi) {
    const double sn = std::sin(phi);
    const double u = T * sn * sn;
    const double tau = s + u;
    if (!(u > 0.0) || !(tau < t)) return 0.0;
    const double ht = p.h(tau);
    const double beta = g.b(tau, ht);
    const double c = 1.0 / (2.0 * beta * u);
    double acc = 0.0;
    for (const NearAtom& a : atoms) acc += a.w * a.dy2 * theta_integral(c, (a.y - ht) * (a.y - ht), (hs - ht) * (hs - ht));
    return 2.0 * std::sqrt(T) * sn * d.W(j, tau) * acc / (std::pow(beta, 1.5) * u * std::sqrt(u));
  };
  const QuadratureRule& gl = gauss_legendre(settings_.singular_nodes);
  const double quarter = 0.25 * std::numbers::pi;
  double total = 0.0;
  double top = quarter;
  for (int k = 0; k <= settings_.singular_lower_panels; ++k) {
    const double bottom = k == settings_.singular_lower_panels ? 0.0 : 0.5 * top;
    total += integrate(gl, bottom, top, integrand);
    top = bottom;
  }
  const int m = settings_.singular_upper_panels;
  for (int k = 0; k < m; ++k) total += integrate(gl, quarter * (1.0 + double(k) / m), quarter * (1.0 + double(k + 1) / m), integrand);
  return -0.5 * kInvSqrt2Pi * total;
}

DensityPair BoundarySystem::solve_densities(const InitialFunction& phi, double t, double s_min,
                                            KernelDump* dump) const {
  return solve_densities(phi, TimeMesh::graded(s_min, t, settings_.mesh_intervals, settings_.grading), dump);
}

DensityPair BoundarySystem::solve_densities(const InitialFunction& phi, const TimeMesh& mesh,
                                            KernelDump* dump) const {
  const Problem& p = problem();
  const int N = mesh.intervals();
  if (N < 3) throw Error(ErrorCode::MeshTooCoarse, "time mesh needs at least 3 intervals");
  const double t = mesh.t;

  // Far atoms put a boundary layer of width ~ dist^2 / (2B) into the kernels; the mesh must resolve it.
  if (p.has_atoms()) {
    double far_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= N; ++k)
      for (const Atom& a : p.wentzell.atoms) {
        const double y = a.position(mesh.s[k]);
        if (!near(mesh.s[k], y)) far_min = std::min(far_min, std::abs(y - p.h(mesh.s[k])));
      }
    double spacing = 0.0;
    for (int k = 0; k < N; ++k) spacing = std::max(spacing, mesh.s[k] - mesh.s[k + 1]);
    const double layer = far_min * far_min / (2.0 * p.upper_diffusion_bound());
    if (spacing > 2.0 * layer)
      throw Error(ErrorCode::MeshTooCoarse, "time mesh spacing " + std::to_string(spacing) +
                                                " does not resolve the atom layer of width " + std::to_string(layer));
  }

  const RightHandSide r = rhs(mesh, phi);
  const double norm = phi.sup_norm();

  // Columns tau of the R_j tables: mesh nodes 1..N-1, then two columns just above s_N for the last diagonal.
  const double s_lo = mesh.s[N];
  const double e_last = 1e-4 * (t - s_lo);
  std::vector<double> col_tau(mesh.s.begin(), mesh.s.begin() + N);
  col_tau.push_back(s_lo + e_last);
  col_tau.push_back(s_lo + 4.0 * e_last);
  const std::size_t ncol = col_tau.size();
  std::vector<std::optional<RadialTable>> tables(2 * ncol);
  parallel_for(2 * (ncol - 1), [&](std::size_t idx) {
    const int j = static_cast<int>(idx % 2) + 1;
    const std::size_t c = idx / 2 + 1;
    if (r_vanishes(j)) return;
    tables[(j - 1) * ncol + c].emplace(r_integrand(j, col_tau[c]), col_tau[c], s_lo, settings_.table_nodes);
  });
  auto column_R = [&](int j, double ss, std::size_t c) {
    const auto& tab = tables[(j - 1) * ncol + c];
    if (!tab) return 0.0;
    const double sign = j == 1 ? -1.0 : 1.0;
    return sign * holmgren(*tab, ss, col_tau[c], settings_.holmgren_lower_panels, settings_.holmgren_upper_panels,
                           settings_.holmgren_nodes);
  };

  // tilde N at (s_k, s_l), l = 1..k; row k holds 4 blocks (i, j)
  std::vector<std::vector<double>> tn(static_cast<std::size_t>(N + 1));
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(N + 1));
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t idx) {
    const int k = static_cast<int>(idx) + 1;
    const double s = mesh.s[k];
    std::vector<double> rho(mesh.r.begin(), mesh.r.begin() + k + 1);
    weights[k] = product_weights(rho, true);
    std::vector<double>& row = tn[k];
    row.assign(static_cast<std::size_t>(4 * (k + 1)), 0.0);
    auto tilde = [&](double ss, std::size_t c, double* out) {
      const double tau = col_tau[c];
      const double root = std::sqrt(tau - ss);
      const double hs = p.h(ss);
      double K[2], R[2];
      for (int j : {1, 2}) {
        K[j - 1] = kernel_K_regular(j, ss, tau);
        R[j - 1] = column_R(j, ss, c);
      }
      for (int i : {1, 2}) {
        const int o = 3 - i;
        const double c_i = (i == 1 ? -1.0 : 1.0) * p.q(o, ss) / std::sqrt(p.b(o, ss, hs));
        const double d_i = p.d(i, ss);
        for (int j : {1, 2}) out[(i - 1) * 2 + (j - 1)] = root * d_i * (K[j - 1] + c_i * R[j - 1]);
      }
    };
    for (int l = 1; l < k; ++l) {
      double out[4];
      tilde(s, static_cast<std::size_t>(l), out);
      for (int b = 0; b < 4; ++b) row[4 * l + b] = out[b];
    }
    // diagonal: tilde N is smooth in sqrt(tau - s); extrapolate to tau = s
    double f1[4], f4[4];
    if (k < N) {
      const double e = 1e-4 * (t - s);
      tilde(s - e, static_cast<std::size_t>(k), f1);
      tilde(s - 4.0 * e, static_cast<std::size_t>(k), f4);
    } else {
      tilde(s, ncol - 2, f1);
      tilde(s, ncol - 1, f4);
    }
    for (int b = 0; b < 4; ++b) row[4 * k + b] = 2.0 * f1[b] - f4[b];
  });
  for (int k = 1; k <= N; ++k)
    for (double v : tn[k])
      if (!std::isfinite(v)) throw Error(ErrorCode::SeriesDivergence, "kernel table contains non-finite values");

  const bool singular = std::isfinite(delta_) && m_delta_ > 0.0;
  std::vector<double> w1(N + 1, 0.0), w2(N + 1, 0.0), t1(N + 1, 0.0), t2(N + 1, 0.0);
  for (int k = 1; k <= N; ++k) {
    t1[k] = mesh.r[k] * r.psi1[k];
    t2[k] = mesh.r[k] * r.psi2[k];
  }
  std::vector<double> term_sup;
  auto sup_of = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max({m, std::abs(a[k]), std::abs(b[k])});
    return m;
  };
  const double tol = settings_.tol_V * norm;
  bool converged = false;
  int stalled = 0;
  for (int m = 0;; ++m) {
    const double sup = sup_of(t1, t2);
    term_sup.push_back(sup);
    if (!std::isfinite(sup))
      throw Error(ErrorCode::SeriesDivergence, "successive approximations produced non-finite values");
    for (int k = 0; k <= N; ++k) {
      w1[k] += t1[k];
      w2[k] += t2[k];
    }
    if (sup <= tol) {
      converged = true;
      break;
    }
    if (m >= 1 && m >= settings_.k0 && sup >= term_sup[m - 1])
      ++stalled;
    else
      stalled = 0;
    if (stalled >= 3)
      throw Error(ErrorCode::SeriesDivergence,
                  "successive approximations stopped contracting after " + std::to_string(m) +
                      " terms (m(delta) = " + std::to_string(m_delta_) + ")");
    if (m + 1 >= settings_.k_max) break;

    DensityPair prev(mesh, t1, t2);
    std::vector<double> n1(N + 1, 0.0), n2(N + 1, 0.0);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t idx) {
      const int k = static_cast<int>(idx) + 1;
      const std::vector<double>& row = tn[k];
      const std::vector<double>& wt = weights[k];
      double acc[2] = {0.0, 0.0};
      for (int l = 1; l <= k; ++l)
        for (int i = 0; i < 2; ++i)
          acc[i] += wt[l] * (row[4 * l + 2 * i] * t1[l] + row[4 * l + 2 * i + 1] * t2[l]);
      if (singular) {
        const double s = mesh.s[k];
        const double a1 = singular_action(1, s, prev), a2 = singular_action(2, s, prev);
        acc[0] += p.d(1, s) * (a1 + a2);
        acc[1] += p.d(2, s) * (a1 + a2);
      }
      n1[k] = mesh.r[k] * acc[0];
      n2[k] = mesh.r[k] * acc[1];
    });
    t1.swap(n1);
    t2.swap(n2);
  }
  if (!converged)
    throw Error(ErrorCode::SeriesDivergence, "successive approximations did not reach tol_V within k_max = " +
                                                 std::to_string(settings_.k_max) + " terms (m(delta) = " +
                                                 std::to_string(m_delta_) + ")");

  DensityPair d(mesh, w1, w2);
  d.term_sup = term_sup;
  d.delta = delta_;
  d.m_delta = m_delta_;
  d.phi_norm = norm;
  int start = 0;
  for (std::size_t m = 1; m < term_sup.size(); ++m)
    if (term_sup[m] >= term_sup[m - 1]) start = static_cast<int>(m);
  d.contraction_start = start;
  double ratio = 0.0;
  for (std::size_t m = start + 1; m < term_sup.size(); ++m)
    if (term_sup[m - 1] > 0.0) ratio = std::max(ratio, term_sup[m] / term_sup[m - 1]);
  d.contraction_ratio = ratio;

  if (dump) {
    dump->mesh = mesh;
    dump->rhs = r;
    dump->tilde_n.assign(2, std::vector<std::vector<std::vector<double>>>(2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        auto& blk = dump->tilde_n[i][j];
        blk.assign(N + 1, {});
        for (int k = 1; k <= N; ++k) {
          blk[k].assign(k + 1, 0.0);
          for (int l = 1; l <= k; ++l) blk[k][l] = tn[k][4 * l + 2 * i + j];
        }
      }
    dump->w1 = w1;
    dump->w2 = w2;
    dump->term_sup = term_sup;
    dump->delta = delta_;
    dump->m_delta = m_delta_;
  }
  return d;
}

std::vector<double> BoundarySystem::first_kind_residual(const DensityPair& d, const InitialFunction& phi) const {
  const TimeMesh& mesh = d.mesh();
  const int N = mesh.intervals();
  std::vector<double> res(N, 0.0);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t idx) {
    const double s = mesh.s[idx + 1];
    const double h = problem().h(s);
    const double lhs = pot_.layer(1, s, h, mesh.t, d) - pot_.layer(2, s, h, mesh.t, d);
    res[idx] = lhs - rhs_phi0(s, mesh.t, phi);
  });
  return res;
}

}  // namespace membrane
