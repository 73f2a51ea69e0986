#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "membrane/problem.hpp"

namespace membrane {

struct ParametrixSettings {
  int max_depth = 40;          // Neumann terms before ConvergenceFailure
  double tol_Q = 1e-8;         // relative sup of the last term
  double r_cut = 8.0;          // space windows |z - c| <= r_cut sqrt(B dt)
  int time_levels = 10;        // table levels, uniform in sqrt(t - tau)
  double eta_step = 0.25;      // terminal table spacing in units of sqrt(b sigma)
  int conv_time_nodes = 8;     // time nodes of one convolution step
  int conv_space_nodes = 28;   // space nodes of one terminal convolution step
  int eval_time_nodes = 32;    // time nodes when applying Z0 to a table
  int eval_space_nodes = 40;
  double field_step = 0.125;   // field grid spacing
  double field_feature = 0.5;  // panel width cap for field convolutions
  double field_margin = 1.5;   // field window margin in units of r_cut sqrt(B sigma_max)

  // Halves the table time mesh and the terminal space step; used for refinement studies.
  ParametrixSettings refined() const;
};

class FundamentalSolution;

// Q(tau, z; t, y) for one terminal point, tabulated as (t - tau) Q on
// levels uniform in sqrt(t - tau) and a scaled space coordinate.
class TerminalTable {
 public:
  TerminalTable(const FundamentalSolution& g, double t, double y, int depth_override = -1);

  double q(double tau, double z) const;
  double t() const { return t_; }
  double y() const { return y_; }
  int depth() const { return static_cast<int>(term_sup_.size()); }
  const std::vector<double>& term_sup() const { return term_sup_; }

  // Lagrange data in the level direction for a given sqrt(t - tau).
  struct LevelStencil {
    int first = 0;
    int count = 0;
    double w[4] = {0, 0, 0, 0};
    double inv_r = 0.0;
  };
  LevelStencil stencil(double r) const;
  double q_at(const LevelStencil& ls, double z) const;
  double support_halfwidth(double sigma) const;  // |z - y| beyond which Q vanishes

 private:
  double interp(const std::vector<double>& u, const LevelStencil& ls, double eta) const;
  double interp_row(const std::vector<double>& u, int level, double eta) const;

  double t_, y_, w_, rmax_;
  int L_, neta_;
  double eta_max_, deta_;
  std::vector<double> r_;
  std::vector<double> u_;
  std::vector<double> term_sup_;
  friend class FundamentalSolution;
};

// Correction density F(tau, z) on [s_min, t) x [z_lo, z_hi], solving F = seed + K (x) F.
// Seed is either K psi (terminal data psi) or a source f(tau, z).
class CorrectionField {
 public:
  enum class SeedKind { Terminal, Source };

  CorrectionField(const FundamentalSolution& g, double t, double s_min, double z_lo, double z_hi, SeedKind kind,
                  std::function<double(double)> psi, std::function<double(double, double)> source,
                  double psi_resolution);

  double value(double tau, double z) const;
  // int_s^t dtau int dz d^p/dx^p Z0(s, x, tau, z) F(tau, z)
  double apply(double s, double x, int p = 0) const;
  int depth() const { return static_cast<int>(term_sup_.size()); }
  const std::vector<double>& term_sup() const { return term_sup_; }
  double t() const { return t_; }
  double s_min() const { return t_ - rmax_ * rmax_; }
  double z_lo() const { return z0_; }
  double z_hi() const { return z0_ + dz_ * (nz_ - 1); }

 private:
  double interp(const std::vector<double>& u, int first, int count, const double* w, double inv_r, double z) const;
  void level_stencil(double r, int& first, int& count, double* w, double& inv_r) const;

  const FundamentalSolution* g_;
  double t_, rmax_, z0_, dz_;
  int L_, nz_;
  std::vector<double> r_;
  std::vector<double> u_;  // r * F, levels x nodes
  std::vector<double> term_sup_;
};

class FundamentalSolution {
 public:
  FundamentalSolution(const Problem& p, int side, ParametrixSettings settings = {});

  int side() const { return side_; }
  const ParametrixSettings& settings() const { return settings_; }
  // Q vanishes: constant diffusion and zero drift.
  bool trivial() const { return trivial_; }
  double b(double s, double x) const { return spec_.diffusion(s, x); }
  double a(double s, double x) const { return spec_.drift(s, x); }
  double b_lower() const { return b_lo_; }
  double b_upper() const { return b_hi_; }
  double holder_exponent() const { return spec_.holder_exponent; }

  double principal(double s, double x, double t, double y, int p = 0) const;
  double seed_kernel(double s, double x, double t, double y) const;
  double correction(double s, double x, double t, double y, int p = 0) const;
  // Z1 from an explicit table (e.g. one truncated at a fixed depth).
  double correction_with(const TerminalTable& table, double s, double x, int p = 0) const;
  double eval(double s, double x, double t, double y, int p = 0) const;
  double Q(double s, double x, double t, double y) const;

  std::shared_ptr<const TerminalTable> terminal(double t, double y) const;

  std::shared_ptr<const CorrectionField> terminal_field(double t, double s_min, double z_lo, double z_hi,
                                                        std::function<double(double)> psi,
                                                        double psi_resolution = 1.0) const;
  std::shared_ptr<const CorrectionField> source_field(double t, double s_min, double z_lo, double z_hi,
                                                      std::function<double(double, double)> f) const;

  // int G(s,x,t,y) psi(y) dy (p-th x-derivative) using a field built on demand.
  double action(double s, double x, double t, const std::function<double(double)>& psi, int p = 0,
                double psi_resolution = 1.0) const;
  // int_s^t dtau int G(s,x,tau,z) f(tau,z) dz
  double duhamel(double s, double x, double t, const std::function<double(double, double)>& f) const;

  // Principal-part action int Z0(s,x,t,y) psi(y) dy with derivative p, composite Gauss-Legendre.
  double principal_action(double s, double x, double t, const std::function<double(double)>& psi, int p,
                          double psi_resolution, const std::vector<double>& breakpoints = {}) const;

  std::size_t cached_terminals() const;

 private:
  SideSpec spec_;
  int side_;
  ParametrixSettings settings_;
  bool trivial_;
  bool constant_;   // translation invariant: one reference table serves every (t, y)
  double horizon_;
  double b_lo_, b_hi_;
  double s_floor_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const TerminalTable>> cache_;
  friend class TerminalTable;
  friend class CorrectionField;
};

// Moment residuals of G at (s, x, t).
struct MomentResiduals {
  double r0 = 0, r1 = 0, r2 = 0;
  double mass = 0, mean = 0, second = 0;  // the left-hand sides
};
MomentResiduals check_moment_identities(const FundamentalSolution& g, double s, double x, double t);

// Sampled audit of |Z1| <= C (t-s)^{-(1-alpha)/2} exp(-c (y-x)^2/(t-s)) with c = 1/(4B).
struct CorrectionAudit {
  double C = 0.0;
  double c = 0.0;
  double min_G = 0.0;
  int samples = 0;
};
CorrectionAudit audit_correction(const FundamentalSolution& g, double t, const std::vector<double>& ys,
                                 const std::vector<double>& xs, const std::vector<double>& dts);

}  // namespace membrane
