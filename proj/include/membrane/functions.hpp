#pragma once

#include <string>
#include <vector>

namespace membrane {

// Scalar function of time: membrane path, Wentzell coefficients, atom positions and weights.
class TimeFunction {
 public:
  enum class Kind { Constant, Linear, Sinusoidal, Tabulated };

  TimeFunction() : params_{0.0} {}

  static TimeFunction constant(double c);
  static TimeFunction linear(double c0, double slope);
  // c0 + amplitude * sin(omega * s + phase)
  static TimeFunction sinusoidal(double c0, double amplitude, double omega, double phase = 0.0);
  // Piecewise linear, clamped outside the table.
  static TimeFunction tabulated(std::vector<double> s, std::vector<double> values);

  double operator()(double s) const;
  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& table_s() const { return ts_; }
  const std::vector<double>& table_values() const { return tv_; }
  bool is_constant() const;

 private:
  Kind kind_ = Kind::Constant;
  std::vector<double> params_;
  std::vector<double> ts_, tv_;
};

// Coefficient a_i(s,x) or b_i(s,x).
class CoefficientField {
 public:
  enum class Kind { Constant, AffineInX, Sinusoidal, Tabulated };

  CoefficientField() : params_{0.0} {}

  static CoefficientField constant(double c);
  // c0 + c1 * clamp(x, x_lo, x_hi); the clamp keeps the field bounded.
  static CoefficientField affine_in_x(double c0, double c1, double x_lo, double x_hi);
  // c0 + c1 * sin(kx * x + ks * s + phase)
  static CoefficientField sinusoidal(double c0, double c1, double kx, double ks, double phase = 0.0);
  // Bilinear on the product grid s x x, clamped outside. values[i][j] at (s[i], x[j]).
  static CoefficientField tabulated(std::vector<double> s, std::vector<double> x,
                                    std::vector<std::vector<double>> values);

  double operator()(double s, double x) const;
  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& table_s() const { return ts_; }
  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<std::vector<double>>& table_values() const { return tv_; }
  bool is_constant() const;
  bool is_zero() const;

 private:
  Kind kind_ = Kind::Constant;
  std::vector<double> params_;
  std::vector<double> ts_, tx_;
  std::vector<std::vector<double>> tv_;
};

// Terminal data phi.
class InitialFunction {
 public:
  enum class Kind { ConstantOne, GaussianBump, IndicatorSmoothed, PolynomialClamped, Tabulated };

  InitialFunction() : params_{1.0}, sup_(1.0), id_("constant-one:1") {}

  static InitialFunction constant_one(double c = 1.0);
  // amplitude * exp(-(x-center)^2 / (2 width^2))
  static InitialFunction gaussian_bump(double amplitude, double center, double width);
  // amplitude * (tanh((x-a)/eps) - tanh((x-b)/eps)) / 2
  static InitialFunction indicator_smoothed(double a, double b, double eps, double amplitude = 1.0);
  // p(clamp(x, lo, hi)), p(z) = sum coeffs[k] z^k
  static InitialFunction polynomial_clamped(double lo, double hi, std::vector<double> coeffs);
  // Local cubic Lagrange on the nodes; stencils never straddle a break (a node index listed in
  // breaks). Constant extrapolation outside the table.
  static InitialFunction tabulated(std::vector<double> x, std::vector<double> values,
                                   std::vector<int> breaks = {});

  double operator()(double x) const { return derivative(x, 0); }
  // order 0, 1 or 2
  double derivative(double x, int order) const;
  double sup_norm() const { return sup_; }
  // Points where phi is not smooth.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  // Length scale on which phi varies; drives quadrature panel widths.
  double resolution() const { return resolution_; }
  // Stable identifier derived from kind and data.
  const std::string& id() const { return id_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<double>& table_values() const { return tv_; }
  const std::vector<int>& table_breaks() const { return tb_; }

 private:
  void finish();
  double tabulated_eval(double x, int order) const;

  Kind kind_ = Kind::ConstantOne;
  std::vector<double> params_;
  std::vector<double> tx_, tv_;
  std::vector<int> tb_;
  std::vector<double> breakpoints_;
  double sup_ = 0.0;
  double resolution_ = 1.0;
  std::string id_;
};

const char* to_string(TimeFunction::Kind k);
const char* to_string(CoefficientField::Kind k);
const char* to_string(InitialFunction::Kind k);

}  // namespace membrane
