#include "membrane/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "membrane/error.hpp"

namespace membrane {

namespace {

// Golub-Welsch on the Jacobi matrix of the monic recurrence.
QuadratureRule golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) J(k, k) = diag[k];
  for (int k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = offdiag[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

// Newton polish of Legendre nodes; weights from the derivative.
void polish_legendre(QuadratureRule& rule) {
  const int n = static_cast<int>(rule.size());
  for (int k = 0; k < n; ++k) {
    double x = rule.nodes[k];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

template <class Build>
const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& cache, std::mutex& m, int n,
                             Build&& build) {
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<QuadratureRule>(build(n));
  const QuadratureRule& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

}  // namespace

QuadratureRule gauss_laguerre(int n, double alpha) {
  if (n < 1 || alpha <= -1.0) throw Error(ErrorCode::InvalidInput, "gauss_laguerre: bad parameters");
  std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1.0 + alpha;
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k * (k + alpha));
  return golub_welsch(diag, off, std::tgamma(alpha + 1.0));
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1 || alpha <= -1.0 || beta <= -1.0) throw Error(ErrorCode::InvalidInput, "gauss_jacobi: bad parameters");
  const double ab = alpha + beta;
  std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) {
    const double c = 2.0 * k + ab;
    if (k == 0)
      diag[k] = (beta - alpha) / (ab + 2.0);
    else
      diag[k] = (beta * beta - alpha * alpha) / (c * (c + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double c = 2.0 * k + ab;
    double b2;
    if (k == 1)
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    else
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (c * c * (c + 1.0) * (c - 1.0));
    off[k - 1] = std::sqrt(b2);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
  return golub_welsch(diag, off, mu0);
}

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex m;
  return cached(cache, m, n, [](int k) {
    QuadratureRule r = gauss_jacobi(k, 0.0, 0.0);
    polish_legendre(r);
    return r;
  });
}

const QuadratureRule& sine_squared(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex m;
  return cached(cache, m, n, [](int k) {
    const QuadratureRule& gl = gauss_legendre(k);
    QuadratureRule r;
    r.nodes.resize(k);
    r.weights.resize(k);
    const double q = std::numbers::pi / 4.0;
    for (int j = 0; j < k; ++j) {
      const double theta = q * (1.0 + gl.nodes[j]);
      const double sn = std::sin(theta);
      r.nodes[j] = sn * sn;
      r.weights[j] = gl.weights[j] * q * std::sin(2.0 * theta);
    }
    return r;
  });
}

void lagrange_weights(const double* xs, int n, double x, double* w) {
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) v *= (x - xs[j]) / (xs[i] - xs[j]);
    w[i] = v;
  }
}

}  // namespace membrane
