#pragma once

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "membrane/parametrix.hpp"
#include "membrane/problem.hpp"

namespace membrane {

// Graded mesh s_k = t - (t - s_min) (k/N)^grading, k = 0..N, so s_0 = t and s_N = s_min.
// For grading 2 the nodes are uniform in r = sqrt(t - s).
struct TimeMesh {
  double t = 0.0;
  double s_min = 0.0;
  double grading = 2.0;
  std::vector<double> s;
  std::vector<double> r;  // sqrt(t - s_k), increasing

  static TimeMesh graded(double s_min, double t, int n, double grading = 2.0);
  int intervals() const { return static_cast<int>(s.size()) - 1; }
  // Cubic Lagrange stencil in r for a point r0 in [0, r_N].
  void stencil(double r0, int& first, int& count, double* w) const;
};

// Regularized densities: V_i(s,t) = (t - s)^{-1/2} W_i(s,t), W_i known at the mesh nodes.
class DensityPair {
 public:
  DensityPair() = default;
  DensityPair(TimeMesh mesh, std::vector<double> w1, std::vector<double> w2);
  static DensityPair zero(TimeMesh mesh);

  const TimeMesh& mesh() const { return mesh_; }
  double t() const { return mesh_.t; }
  double s_min() const { return mesh_.s_min; }
  const std::vector<double>& nodes(int i) const { return i == 1 ? w1_ : w2_; }
  // Interpolated W_i(tau); cubic in sqrt(t - tau).
  double W(int i, double tau) const;
  double V(int i, double tau) const;
  double max_abs() const;
  bool is_zero() const;

  // Solver diagnostics.
  std::vector<double> term_sup;  // sup_k |W^{(m)}(s_k)| for each series term m
  int contraction_start = 0;     // first index past which term_sup decays geometrically
  double contraction_ratio = 0;  // largest successive ratio past contraction_start
  double delta = std::numeric_limits<double>::infinity();
  double m_delta = 0.0;
  double phi_norm = 0.0;

 private:
  TimeMesh mesh_;
  std::vector<double> w1_, w2_;
};

struct PotentialSettings {
  ParametrixSettings parametrix;
  int panel_nodes = 8;         // Gauss-Legendre nodes per time panel
  int geometric_panels = 28;   // panels toward tau = s, halving in sqrt(tau - s)
};

// Poisson potential, simple-layer potential and its boundary behavior for one problem.
class Potentials {
 public:
  explicit Potentials(const Problem& p, PotentialSettings st = {});

  const Problem& problem() const { return problem_; }
  const PotentialSettings& settings() const { return settings_; }
  const FundamentalSolution& G(int i) const { return i == 1 ? *g1_ : *g2_; }

  // int G_i(s,x,t,y) phi(y) dy, p-th x-derivative.
  double poisson(int i, double s, double x, double t, const InitialFunction& phi, int p = 0) const;
  // int_s^t G_i(s,x,tau,h(tau)) V_i(tau,t) dtau
  double layer(int i, double s, double x, double t, const DensityPair& d) const;
  // int_s^t dG_i/dx(s,h(s),tau,h(tau)) V_i(tau,t) dtau
  double direct_value(int i, double s, double t, const DensityPair& d) const;
  // (limit from the left, limit from the right) of du_i1/dx at x = h(s)
  std::pair<double, double> conormal_jump(int i, double s, double t, const DensityPair& d) const;

 private:
  double layer_principal(int i, double s, double x, double t, const DensityPair& d, bool derivative) const;
  double layer_correction(int i, double s, double x, double t, const DensityPair& d, bool derivative) const;
  void check_mesh(double s, double t, const DensityPair& d) const;

  Problem problem_;
  PotentialSettings settings_;
  std::unique_ptr<FundamentalSolution> g1_, g2_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<int, double, std::string>, std::shared_ptr<const CorrectionField>> fields_;
};

// Product quadrature on nodes 0 = rho_0 < ... < rho_m with piecewise quadratic interpolation:
// returns weights w_l with int_0^{rho_m} kernel(r) f(r) dr ~ sum w_l f(rho_l), where
// kernel(r) = 2 (rho_m^2 - r^2)^{-1/2} (abel = true) or 2 (abel = false).
std::vector<double> product_weights(const std::vector<double>& rho, bool abel);

}  // namespace membrane
