#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "membrane/boundary_system.hpp"

namespace membrane {

struct SemigroupSettings {
  SolverSettings solver;
  double retab_spacing = 0.01;  // x-spacing of the re-tabulated intermediate field in Chapman-Kolmogorov
  double retab_window = 8.0;    // half-width of that grid beyond the audit grid, in sqrt(B (tau - s))
  double tol_dom = 1e-8;        // domain residuals below this admit the pointwise generator limit
  int pairing_panels = 24;      // Gauss-Legendre panels per side of the membrane in x-pairings
  int pairing_nodes = 8;
};

// l_j, d_i, a_0 and the coefficients of the generalized diffusion (mu empty).
class EffectiveCoefficients {
 public:
  explicit EffectiveCoefficients(const Problem& p);

  double l(int j, double s) const { return p_.l(j, s); }
  double d(int i, double s) const { return p_.d(i, s); }
  double a0(double s) const;
  double b(double s, double x) const;
  double a(double s, double x) const;

 private:
  Problem p_;
};

struct EffectiveValues {
  double b = 0.0;
  double a = 0.0;
  double a0 = 0.0;
};

// Throws MeasureNotNull when the problem has atoms.
EffectiveValues effective_coefficients(const Problem& p, double s, double x);

// L_s phi(x): side operator off the membrane, l_j-weighted mix on it.
double generator_L(const Problem& p, double s, double x, const InitialFunction& phi);
// L_s^{(i)} phi(x) = b_i phi''/2 + a_i phi'
double side_generator(const Problem& p, int i, double s, double x, const InitialFunction& phi);

struct ChapmanKolmogorov {
  double discrepancy = 0.0;  // sup over the audit grid
  double retab_spacing = 0.0;
  int retab_nodes = 0;
};

struct PositivityContraction {
  double min_value = 0.0;
  double sup_norm = 0.0;
  double phi_norm = 0.0;
};

struct Conjugation {
  double b1 = 0.0;  // max over mesh nodes of |u(h-0) - u(h+0)|
  double b2 = 0.0;  // max over mesh nodes of |q1 u_x(h-0) - q2 u_x(h+0) + sum w (u(h) - u(y))|
  std::vector<double> s, b1_nodes, b2_nodes;
  double phi_norm = 0.0;
};

struct WeakGenerator {
  std::vector<double> dt;
  std::vector<double> lhs;
  double rhs = 0.0;
  double bulk = 0.0;           // int f L_s phi dx
  double boundary = 0.0;       // membrane term of rhs
};

struct DomainCheck {
  double residual_1 = 0.0;
  double residual_2 = 0.0;
  bool in_domain = false;
  std::vector<double> dt;
  std::vector<double> sup_error;  // sup over the audit grid of |(T phi - phi)/dt - L_s phi|, empty if skipped
  std::vector<double> x;
  std::vector<std::vector<double>> quotient;  // per dt, (T phi - phi)/dt at x
};

struct Moments {
  double mean = 0.0;
  double second = 0.0;
  double fourth = 0.0;
};

struct MomentLimits {
  double dt = 0.0;
  double mean_pairing = 0.0;    // int f(x) [mean(x)/dt] dx
  double second_pairing = 0.0;  // int f(x) [second(x)/dt] dx
  double drift_target = 0.0;    // int a f dx + a_0 f(h)
  double diffusion_target = 0.0;  // int b f dx
};

// Compactly supported test function for x-pairings.
struct TestFunction {
  std::function<double(double)> f;
  double lo = 0.0, hi = 0.0;
  // (1 - ((x - c)/r)^2)^2 on |x - c| < r
  static TestFunction bump(double center, double radius);
};

// T_st phi(x) = E[phi(X_t) | X_s = x], evaluated through the layer densities.
class SemigroupOperator {
 public:
  explicit SemigroupOperator(const Problem& p, SemigroupSettings st = {});

  const Problem& problem() const { return sys_.problem(); }
  const BoundarySystem& system() const { return sys_; }
  const SemigroupSettings& settings() const { return settings_; }

  // Densities on the mesh [s_min, t], memoized on (s_min, t, phi id).
  std::shared_ptr<const DensityPair> densities(double s_min, double t, const InitialFunction& phi) const;
  std::size_t memo_size() const;

  double value(double s, double x, double t, const InitialFunction& phi) const;
  std::function<double(double)> apply(double s, double t, const InitialFunction& phi) const;
  std::vector<double> apply(double s, double t, const InitialFunction& phi, const std::vector<double>& xs) const;
  // T_st phi restricted to side i at x, continued across the membrane.
  double side_value(int i, double s, double x, double t, const InitialFunction& phi) const;

  std::vector<double> audit_grid() const;

  // T_{tau t} phi re-ingested as a tabulated function with a break at h(tau).
  InitialFunction retabulate(double s, double tau, double t, const InitialFunction& phi) const;
  ChapmanKolmogorov check_chapman_kolmogorov(double s, double tau, double t, const InitialFunction& phi) const;
  PositivityContraction check_positivity_contraction(double s, double t, const InitialFunction& phi) const;
  // sup over the audit grid of |T_st 1 - 1|
  double check_conservation(double s, double t) const;
  Conjugation check_conjugation(double s, double t, const InitialFunction& phi) const;
  // sup over the audit grid of |T_st phi_n - T_st phi| for each n
  std::vector<double> check_continuity(double s, double t, const std::vector<InitialFunction>& seq,
                                       const InitialFunction& limit) const;

  WeakGenerator weak_generator_pairing(double s, const InitialFunction& phi, const TestFunction& f,
                                       const std::vector<double>& dts) const;
  DomainCheck generator_domain_check(double s, const InitialFunction& phi, const std::vector<double>& dts) const;
  DomainCheck generator_domain_check(double s, const InitialFunction& phi, const std::vector<double>& dts,
                                     const std::vector<double>& xs) const;
  // Throws MeasureNotNull when the problem has atoms.
  Moments transition_moments(double s, double x, double t) const;
  MomentLimits moment_limits(double s, double dt, const TestFunction& f) const;

 private:

  BoundarySystem sys_;
  SemigroupSettings settings_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<double, double, std::string>, std::shared_ptr<const DensityPair>> memo_;
};

}  // namespace membrane
