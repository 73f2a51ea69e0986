#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "membrane/problem.hpp"

namespace membrane {

struct SkewParams {
  double alpha = 0.5;  // probability of leaving the membrane to the right
  double sigma = 1.0;

  // alpha = q2 sqrt(b1) / (q2 sqrt(b1) + q1 sqrt(b2)) at time s; sigma = sqrt(b1). Requires b1 = b2 at the membrane.
  static SkewParams from_problem(const Problem& p, double s);
};

// Skew Brownian motion transition density, membrane at 0.
double skew_density(const SkewParams& params, double dt, double x, double y);

// int skew_density(dt, x, y) phi(y) dy by composite Gauss-Legendre, split at the membrane.
double skew_action(const SkewParams& params, double dt, double x, const std::function<double(double)>& phi);

enum class Scheme { EulerSkew, ExactGaussianIncrement };

struct SimConfig {
  std::size_t paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  Scheme scheme = Scheme::EulerSkew;
  double max_double_cross = 0.05;  // StepTooLarge above this fraction of steps
};

struct SimResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> endpoints;  // X_t per path
  std::size_t paths = 0;
  int steps = 0;
  double double_cross_fraction = 0.0;  // steps that reached the membrane and ended on the starting side
  std::size_t jumps = 0;
};

// Particle simulation of X_t given X_s = x; estimates E[phi(X_t)].
// EulerSkew: Euler steps in the side-scaled distance to the membrane, crossings resolved by the
// exact skew Brownian bridge rule; atoms are reached through thin-layer jumps.
// ExactGaussianIncrement: Gaussian increments with the coefficients of the current side, membrane ignored.
SimResult simulate(const Problem& p, double s, double x, double t, const std::function<double(double)>& phi,
                   const SimConfig& config);

struct Comparison {
  double z = 0.0;
  bool pass = false;
};

// pass iff |solver - mc| <= k_sigma * stderr. With stderr = 0 only exact agreement passes.
Comparison compare(double solver_value, double mc_estimate, double stderr_, double k_sigma = 3.0);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace membrane
