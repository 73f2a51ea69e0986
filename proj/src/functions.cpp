#include "membrane/functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "membrane/error.hpp"

namespace membrane {

namespace {

std::size_t locate(const std::vector<double>& xs, double x) {
  // index j with xs[j] <= x < xs[j+1], clamped to [0, n-2]
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t j = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(j, xs.size() - 2);
}

void require_increasing(const std::vector<double>& xs, const char* what) {
  if (xs.size() < 2) throw Error(ErrorCode::InvalidInput, std::string(what) + ": table needs at least two nodes");
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] > xs[k - 1]))
      throw Error(ErrorCode::InvalidInput, std::string(what) + ": table nodes must be strictly increasing");
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidInput, std::string(what) + ": non-finite parameter");
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= p[k];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- TimeFunction

TimeFunction TimeFunction::constant(double c) {
  TimeFunction f;
  f.kind_ = Kind::Constant;
  f.params_ = {c};
  require_finite(f.params_, "constant");
  return f;
}

TimeFunction TimeFunction::linear(double c0, double slope) {
  TimeFunction f;
  f.kind_ = Kind::Linear;
  f.params_ = {c0, slope};
  require_finite(f.params_, "linear");
  return f;
}

TimeFunction TimeFunction::sinusoidal(double c0, double amplitude, double omega, double phase) {
  TimeFunction f;
  f.kind_ = Kind::Sinusoidal;
  f.params_ = {c0, amplitude, omega, phase};
  require_finite(f.params_, "sinusoidal");
  return f;
}

TimeFunction TimeFunction::tabulated(std::vector<double> s, std::vector<double> values) {
  require_increasing(s, "tabulated time function");
  if (values.size() != s.size()) throw Error(ErrorCode::InvalidInput, "tabulated time function: size mismatch");
  require_finite(values, "tabulated time function");
  TimeFunction f;
  f.kind_ = Kind::Tabulated;
  f.ts_ = std::move(s);
  f.tv_ = std::move(values);
  return f;
}

double TimeFunction::operator()(double s) const {
  switch (kind_) {
    case Kind::Constant: return params_[0];
    case Kind::Linear: return params_[0] + params_[1] * s;
    case Kind::Sinusoidal: return params_[0] + params_[1] * std::sin(params_[2] * s + params_[3]);
    case Kind::Tabulated: {
      if (s <= ts_.front()) return tv_.front();
      if (s >= ts_.back()) return tv_.back();
      const std::size_t j = locate(ts_, s);
      const double w = (s - ts_[j]) / (ts_[j + 1] - ts_[j]);
      return (1.0 - w) * tv_[j] + w * tv_[j + 1];
    }
  }
  return 0.0;
}

bool TimeFunction::is_constant() const {
  switch (kind_) {
    case Kind::Constant: return true;
    case Kind::Linear: return params_[1] == 0.0;
    case Kind::Sinusoidal: return params_[1] == 0.0 || params_[2] == 0.0;
    case Kind::Tabulated:
      return std::all_of(tv_.begin(), tv_.end(), [&](double v) { return v == tv_.front(); });
  }
  return false;
}

// ------------------------------------------------------------ CoefficientField

CoefficientField CoefficientField::constant(double c) {
  CoefficientField f;
  f.kind_ = Kind::Constant;
  f.params_ = {c};
  require_finite(f.params_, "constant coefficient");
  return f;
}

CoefficientField CoefficientField::affine_in_x(double c0, double c1, double x_lo, double x_hi) {
  if (!(x_lo < x_hi)) throw Error(ErrorCode::InvalidInput, "affine-in-x: clamp window must satisfy x_lo < x_hi");
  CoefficientField f;
  f.kind_ = Kind::AffineInX;
  f.params_ = {c0, c1, x_lo, x_hi};
  require_finite(f.params_, "affine-in-x");
  return f;
}

CoefficientField CoefficientField::sinusoidal(double c0, double c1, double kx, double ks, double phase) {
  CoefficientField f;
  f.kind_ = Kind::Sinusoidal;
  f.params_ = {c0, c1, kx, ks, phase};
  require_finite(f.params_, "sinusoidal coefficient");
  return f;
}

CoefficientField CoefficientField::tabulated(std::vector<double> s, std::vector<double> x,
                                             std::vector<std::vector<double>> values) {
  require_increasing(s, "tabulated coefficient (s)");
  require_increasing(x, "tabulated coefficient (x)");
  if (values.size() != s.size()) throw Error(ErrorCode::InvalidInput, "tabulated coefficient: row count mismatch");
  for (const auto& row : values) {
    if (row.size() != x.size()) throw Error(ErrorCode::InvalidInput, "tabulated coefficient: column count mismatch");
    require_finite(row, "tabulated coefficient");
  }
  CoefficientField f;
  f.kind_ = Kind::Tabulated;
  f.ts_ = std::move(s);
  f.tx_ = std::move(x);
  f.tv_ = std::move(values);
  return f;
}

double CoefficientField::operator()(double s, double x) const {
  switch (kind_) {
    case Kind::Constant: return params_[0];
    case Kind::AffineInX: return params_[0] + params_[1] * std::clamp(x, params_[2], params_[3]);
    case Kind::Sinusoidal: return params_[0] + params_[1] * std::sin(params_[2] * x + params_[3] * s + params_[4]);
    case Kind::Tabulated: {
      const double sc = std::clamp(s, ts_.front(), ts_.back());
      const double xc = std::clamp(x, tx_.front(), tx_.back());
      const std::size_t i = locate(ts_, sc);
      const std::size_t j = locate(tx_, xc);
      const double u = (sc - ts_[i]) / (ts_[i + 1] - ts_[i]);
      const double v = (xc - tx_[j]) / (tx_[j + 1] - tx_[j]);
      return (1 - u) * ((1 - v) * tv_[i][j] + v * tv_[i][j + 1]) + u * ((1 - v) * tv_[i + 1][j] + v * tv_[i + 1][j + 1]);
    }
  }
  return 0.0;
}

bool CoefficientField::is_constant() const {
  switch (kind_) {
    case Kind::Constant: return true;
    case Kind::AffineInX: return params_[1] == 0.0;
    case Kind::Sinusoidal: return params_[1] == 0.0 || (params_[2] == 0.0 && params_[3] == 0.0);
    case Kind::Tabulated:
      for (const auto& row : tv_)
        for (double v : row)
          if (v != tv_.front().front()) return false;
      return true;
  }
  return false;
}

bool CoefficientField::is_zero() const { return is_constant() && (*this)(0.0, 0.0) == 0.0; }

// ------------------------------------------------------------- InitialFunction

InitialFunction InitialFunction::constant_one(double c) {
  InitialFunction f;
  f.kind_ = Kind::ConstantOne;
  f.params_ = {c};
  f.finish();
  return f;
}

InitialFunction InitialFunction::gaussian_bump(double amplitude, double center, double width) {
  if (!(width > 0)) throw Error(ErrorCode::InvalidInput, "gaussian-bump: width must be positive");
  InitialFunction f;
  f.kind_ = Kind::GaussianBump;
  f.params_ = {amplitude, center, width};
  f.finish();
  return f;
}

InitialFunction InitialFunction::indicator_smoothed(double a, double b, double eps, double amplitude) {
  if (!(a < b) || !(eps > 0)) throw Error(ErrorCode::InvalidInput, "indicator-smoothed: need a < b and eps > 0");
  InitialFunction f;
  f.kind_ = Kind::IndicatorSmoothed;
  f.params_ = {a, b, eps, amplitude};
  f.finish();
  return f;
}

InitialFunction InitialFunction::polynomial_clamped(double lo, double hi, std::vector<double> coeffs) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidInput, "polynomial-clamped: need lo < hi");
  if (coeffs.empty()) throw Error(ErrorCode::InvalidInput, "polynomial-clamped: no coefficients");
  InitialFunction f;
  f.kind_ = Kind::PolynomialClamped;
  f.params_ = {lo, hi};
  f.params_.insert(f.params_.end(), coeffs.begin(), coeffs.end());
  f.finish();
  return f;
}

InitialFunction InitialFunction::tabulated(std::vector<double> x, std::vector<double> values, std::vector<int> breaks) {
  require_increasing(x, "tabulated initial function");
  if (values.size() != x.size()) throw Error(ErrorCode::InvalidInput, "tabulated initial function: size mismatch");
  require_finite(values, "tabulated initial function");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (int b : breaks)
    if (b <= 0 || b >= static_cast<int>(x.size()) - 1)
      throw Error(ErrorCode::InvalidInput, "tabulated initial function: break index must be interior");
  InitialFunction f;
  f.kind_ = Kind::Tabulated;
  f.tx_ = std::move(x);
  f.tv_ = std::move(values);
  f.tb_ = std::move(breaks);
  f.finish();
  return f;
}

void InitialFunction::finish() {
  require_finite(params_, "initial function");
  std::string key = to_string(kind_);
  for (double p : params_) key += ":" + fmt17(p);
  breakpoints_.clear();
  switch (kind_) {
    case Kind::ConstantOne:
      sup_ = std::abs(params_[0]);
      resolution_ = 1.0;
      break;
    case Kind::GaussianBump:
      sup_ = std::abs(params_[0]);
      resolution_ = params_[2];
      break;
    case Kind::IndicatorSmoothed:
      sup_ = std::abs(params_[3]) * std::tanh((params_[1] - params_[0]) / (2.0 * params_[2]));
      resolution_ = params_[2];
      break;
    case Kind::PolynomialClamped: {
      const double lo = params_[0], hi = params_[1];
      sup_ = 0.0;
      const int n = 20000;
      for (int k = 0; k <= n; ++k) sup_ = std::max(sup_, std::abs(derivative(lo + (hi - lo) * k / n, 0)));
      breakpoints_ = {lo, hi};
      resolution_ = 1.0;
      break;
    }
    case Kind::Tabulated: {
      sup_ = 0.0;
      for (std::size_t j = 0; j + 1 < tx_.size(); ++j)
        for (int q = 0; q < 8; ++q) sup_ = std::max(sup_, std::abs(tabulated_eval(tx_[j] + (tx_[j + 1] - tx_[j]) * q / 8.0, 0)));
      sup_ = std::max(sup_, std::abs(tv_.back()));
      double dx = tx_.back() - tx_.front();
      for (std::size_t j = 0; j + 1 < tx_.size(); ++j) dx = std::min(dx, tx_[j + 1] - tx_[j]);
      resolution_ = dx;
      for (int b : tb_) breakpoints_.push_back(tx_[b]);
      breakpoints_.push_back(tx_.front());
      breakpoints_.push_back(tx_.back());
      std::sort(breakpoints_.begin(), breakpoints_.end());
      std::uint64_t h = fnv1a(tx_.data(), tx_.size() * sizeof(double));
      h = fnv1a(tv_.data(), tv_.size() * sizeof(double), h);
      h = fnv1a(tb_.data(), tb_.size() * sizeof(int), h);
      char buf[32];
      std::snprintf(buf, sizeof buf, ":%016llx", static_cast<unsigned long long>(h));
      key += buf;
      break;
    }
  }
  id_ = key;
}

double InitialFunction::derivative(double x, int order) const {
  switch (kind_) {
    case Kind::ConstantOne: return order == 0 ? params_[0] : 0.0;
    case Kind::GaussianBump: {
      const double A = params_[0], c = params_[1], w = params_[2];
      const double z = (x - c) / w;
      const double g = A * std::exp(-0.5 * z * z);
      if (order == 0) return g;
      if (order == 1) return -z / w * g;
      return (z * z - 1.0) / (w * w) * g;
    }
    case Kind::IndicatorSmoothed: {
      const double a = params_[0], b = params_[1], e = params_[2], A = params_[3];
      const double ta = std::tanh((x - a) / e), tb = std::tanh((x - b) / e);
      if (order == 0) return 0.5 * A * (ta - tb);
      const double sa = 1.0 - ta * ta, sb = 1.0 - tb * tb;
      if (order == 1) return 0.5 * A * (sa - sb) / e;
      return 0.5 * A * (-2.0 * ta * sa + 2.0 * tb * sb) / (e * e);
    }
    case Kind::PolynomialClamped: {
      const double lo = params_[0], hi = params_[1];
      if (order > 0 && (x < lo || x > hi)) return 0.0;
      const double z = std::clamp(x, lo, hi);
      double p = 0, dp = 0, ddp = 0;
      for (std::size_t k = params_.size(); k-- > 2;) {
        ddp = ddp * z + 2.0 * dp;
        dp = dp * z + p;
        p = p * z + params_[k];
      }
      return order == 0 ? p : (order == 1 ? dp : ddp);
    }
    case Kind::Tabulated: return tabulated_eval(x, order);
  }
  return 0.0;
}

double InitialFunction::tabulated_eval(double x, int order) const {
  const int n = static_cast<int>(tx_.size());
  if (x <= tx_.front()) return order == 0 ? tv_.front() : 0.0;
  if (x >= tx_.back()) return order == 0 ? tv_.back() : 0.0;
  const int j = static_cast<int>(locate(tx_, x));
  // segment [lo, hi] of node indices bounded by breaks and table ends
  int lo = 0, hi = n - 1;
  for (int b : tb_) {
    if (b <= j) lo = std::max(lo, b);
    if (b >= j + 1) hi = std::min(hi, b);
  }
  int first = std::max(lo, j - 1);
  int last = std::min(hi, first + 3);
  first = std::max(lo, last - 3);
  const int m = last - first + 1;
  // Newton divided differences, then Horner with derivatives
  double xs[4], dd[4];
  for (int k = 0; k < m; ++k) {
    xs[k] = tx_[first + k];
    dd[k] = tv_[first + k];
  }
  for (int level = 1; level < m; ++level)
    for (int k = m - 1; k >= level; --k) dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - level]);
  double p = dd[m - 1], dp = 0.0, ddp = 0.0;
  for (int k = m - 2; k >= 0; --k) {
    ddp = ddp * (x - xs[k]) + 2.0 * dp;
    dp = dp * (x - xs[k]) + p;
    p = p * (x - xs[k]) + dd[k];
  }
  return order == 0 ? p : (order == 1 ? dp : ddp);
}

const char* to_string(TimeFunction::Kind k) {
  switch (k) {
    case TimeFunction::Kind::Constant: return "constant";
    case TimeFunction::Kind::Linear: return "linear";
    case TimeFunction::Kind::Sinusoidal: return "sinusoidal";
    case TimeFunction::Kind::Tabulated: return "tabulated";
  }
  return "?";
}

const char* to_string(CoefficientField::Kind k) {
  switch (k) {
    case CoefficientField::Kind::Constant: return "constant";
    case CoefficientField::Kind::AffineInX: return "affine-in-x";
    case CoefficientField::Kind::Sinusoidal: return "sinusoidal-in-s-and-x";
    case CoefficientField::Kind::Tabulated: return "tabulated";
  }
  return "?";
}

const char* to_string(InitialFunction::Kind k) {
  switch (k) {
    case InitialFunction::Kind::ConstantOne: return "constant-one";
    case InitialFunction::Kind::GaussianBump: return "gaussian-bump";
    case InitialFunction::Kind::IndicatorSmoothed: return "indicator-smoothed";
    case InitialFunction::Kind::PolynomialClamped: return "polynomial-clamped";
    case InitialFunction::Kind::Tabulated: return "tabulated";
  }
  return "?";
}

}  // namespace membrane
