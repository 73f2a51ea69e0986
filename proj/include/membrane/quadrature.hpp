#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace membrane {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [-1,1]. Cached; the reference stays valid for the process lifetime.
const QuadratureRule& gauss_legendre(int n);

// Gauss-Jacobi on [-1,1] for the weight (1-x)^alpha (1+x)^beta, alpha, beta > -1.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

// Generalized Gauss-Laguerre on [0,inf) for the weight x^alpha e^{-x}, alpha > -1.
QuadratureRule gauss_laguerre(int n, double alpha);

// Rule on [0,1] built from u = sin^2(theta) with Gauss-Legendre in theta.
// Integrands behaving like u^{-1/2} or (1-u)^{-1/2} times a smooth factor are
// integrated spectrally. Weights include the Jacobian.
const QuadratureRule& sine_squared(int n);

template <class F>
double integrate(const QuadratureRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return acc * half;
}

// Integral over [a,b] using the sine_squared rule.
template <class F>
double integrate_endpoint_singular(int n, double a, double b, F&& f) {
  const QuadratureRule& rule = sine_squared(n);
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * f(a + len * rule.nodes[k]);
  return acc * len;
}

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Lagrange interpolation weights for the points xs[0..n) evaluated at x.
void lagrange_weights(const double* xs, int n, double x, double* w);

}  // namespace membrane
