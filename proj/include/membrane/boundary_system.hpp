#pragma once

#include <functional>
#include <vector>

#include "membrane/potentials.hpp"
#include "membrane/problem.hpp"

namespace membrane {

struct SolverSettings {
  PotentialSettings potentials;
  int mesh_intervals = 64;
  double grading = 2.0;
  double tol_V = 1e-8;       // series stops once the sup of a term is below tol_V * ||phi||
  int k_max = 200;
  int k0 = 10;               // iterations before stalled decay counts as divergence
  // tau quadrature of the singular measure part after tau = s + (t - s) sin^2(phi)
  int singular_lower_panels = 24;
  int singular_upper_panels = 4;
  int singular_nodes = 8;
  double delta = 0.0;        // <= 0: half the minimal atom distance to the membrane
  int holmgren_lower_panels = 16;
  int holmgren_upper_panels = 10;
  int holmgren_nodes = 8;
  int table_nodes = 128;     // sqrt(tau - rho) nodes tabulating Phi0 and the R_j integrands per column
};

// (1/sqrt(2 pi)) int_s^t (rho - s)^{-3/2} [f(rho) - f(s)] drho - sqrt(2/pi) (t - s)^{-1/2} f(s)
// Throws SingularIntegrand when the increment of f does not decay fast enough at rho = s.
// Increments of size 1e-13 * max(scale, |f(s)|) count as rounding noise in that check.
double holmgren(const std::function<double(double)>& f, double s, double t, int lower_panels = 16,
                int upper_panels = 10, int nodes = 8, double scale = 0.0);

// Mesh values of the right-hand sides.
struct RightHandSide {
  TimeMesh mesh;
  std::vector<double> phi0, psi, phi, psi1, psi2;
  double sup_scaled = 0.0;  // max_k sqrt(t - s_k) (|Phi| + |Psi|), k >= 1
};

// Strongly singular measure part of N_ij(s, tau), kept factored.
struct SingularKernel {
  double prefactor = 0.0;  // -d_i(s) / (2 sqrt(2 pi) (b_j(tau, h(tau)) (tau - s))^{3/2})
  double moment = 0.0;     // sum over near atoms of w (y - h(s))^2
  double value = 0.0;      // prefactor * sum_k w_k (y_k - h(s))^2 int_0^1 exp(-A_k / (2 b (tau - s))) dtheta
};

struct KernelN {
  double regular = 0.0;
  SingularKernel singular;
};

// Debug dump of one solve.
struct KernelDump {
  TimeMesh mesh;
  RightHandSide rhs;
  // tilde_n[i][j][k][l] = sqrt(s_l - s_k) N_ij^{(1)}(s_k, s_l), l <= k (diagonal extrapolated)
  std::vector<std::vector<std::vector<std::vector<double>>>> tilde_n;
  std::vector<double> w1, w2;
  std::vector<double> term_sup;
  double delta = 0.0, m_delta = 0.0;
};

class BoundarySystem {
 public:
  explicit BoundarySystem(const Problem& p, SolverSettings st = {});

  const Problem& problem() const { return pot_.problem(); }
  const Potentials& potentials() const { return pot_; }
  const SolverSettings& settings() const { return settings_; }
  double delta() const { return delta_; }
  double m_delta() const { return m_delta_; }

  double rhs_phi0(double s, double t, const InitialFunction& phi) const;
  double rhs_psi(double s, double t, const InitialFunction& phi) const;
  double rhs_phi(double s, double t, const InitialFunction& phi) const;
  RightHandSide rhs(const TimeMesh& mesh, const InitialFunction& phi) const;

  // Full kernels: every atom on side j enters K_j.
  double kernel_K(int j, double s, double tau) const;
  double kernel_R(int j, double s, double tau) const;
  KernelN kernel_N(int i, int j, double s, double tau) const;

  DensityPair solve_densities(const InitialFunction& phi, double t, double s_min = 0.0,
                              KernelDump* dump = nullptr) const;
  DensityPair solve_densities(const InitialFunction& phi, const TimeMesh& mesh, KernelDump* dump = nullptr) const;

  // sum_i (-1)^{i-1} u_i1(s_k, h(s_k), t) - Phi0(s_k, t) for k = 1..N
  std::vector<double> first_kind_residual(const DensityPair& d, const InitialFunction& phi) const;

 private:
  bool near(double s, double y) const;
  std::function<double(double)> r_integrand(int j, double tau) const;
  bool r_vanishes(int j) const;
  // K_j with the near-atom Z0 increments replaced by their regular I^(31) part.
  double kernel_K_regular(int j, double s, double tau) const;
  double kernel_N1(int i, int j, double s, double tau) const;
  // int_s^t N_ij^{(2)}(s, tau) V_j(tau) dtau / d_i(s), V_j = W_j / sqrt(t - tau)
  double singular_action(int j, double s, const DensityPair& d) const;

  Potentials pot_;
  SolverSettings settings_;
  double delta_ = 0.0;
  double m_delta_ = 0.0;
};

}  // namespace membrane
