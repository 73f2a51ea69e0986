#include "membrane/parametrix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "membrane/error.hpp"
#include "membrane/parallel.hpp"
#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Composite Gauss-Legendre over [lo, hi] with panels no wider than h.
template <class F>
double composite(double lo, double hi, double h, int n, F&& f, int max_panels = 400) {
  if (!(hi > lo)) return 0.0;
  int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
  panels = std::min(panels, max_panels);
  const QuadratureRule& gl = gauss_legendre(n);
  const double width = (hi - lo) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + width * p;
    const double mid = a + 0.5 * width;
    double part = 0.0;
    for (int k = 0; k < n; ++k) part += gl.weights[k] * f(mid + 0.5 * width * gl.nodes[k]);
    acc += part * 0.5 * width;
  }
  return acc;
}

void uniform_stencil(double pos, int n_nodes, int width, int& first, double* w) {
  // pos in node units; picks `width` consecutive nodes around pos
  int j = static_cast<int>(std::floor(pos));
  first = j - (width / 2 - 1);
  first = std::clamp(first, 0, n_nodes - width);
  double xs[8] = {};
  for (int k = 0; k < width; ++k) xs[k] = first + k;
  lagrange_weights(xs, width, pos, w);
}

}  // namespace

ParametrixSettings ParametrixSettings::refined() const {
  ParametrixSettings r = *this;
  r.time_levels *= 2;
  r.eta_step /= 2;
  return r;
}

// ------------------------------------------------------------ FundamentalSolution

FundamentalSolution::FundamentalSolution(const Problem& p, int side, ParametrixSettings settings)
    : spec_(p.side(side)), side_(side), settings_(settings), horizon_(p.horizon), s_floor_(0.0) {
  trivial_ = spec_.diffusion.is_constant() && spec_.drift.is_zero();
  constant_ = spec_.diffusion.is_constant() && spec_.drift.is_constant();
  b_lo_ = p.lower_diffusion_bound(side);
  b_hi_ = p.upper_diffusion_bound(side);
  if (!(b_lo_ > 0)) throw Error(ErrorCode::NonparabolicCoefficient, "diffusion must be positive");
}

double FundamentalSolution::principal(double s, double x, double t, double y, int p) const {
  require_time_order(s, t, "principal kernel");
  const double beta = b(t, y);
  const double v = beta * (t - s);
  const double d = y - x;
  const double g = kInvSqrt2Pi / std::sqrt(v) * std::exp(-0.5 * d * d / v);
  if (p == 0) return g;
  if (p == 1) return d / v * g;
  return (d * d / (v * v) - 1.0 / v) * g;
}

double FundamentalSolution::seed_kernel(double s, double x, double t, double y) const {
  const double beta = b(t, y);
  const double v = beta * (t - s);
  const double d = y - x;
  const double g = kInvSqrt2Pi / std::sqrt(v) * std::exp(-0.5 * d * d / v);
  const double d1 = d / v * g;
  const double d2 = (d * d / (v * v) - 1.0 / v) * g;
  return 0.5 * (b(s, x) - beta) * d2 + a(s, x) * d1;
}

std::shared_ptr<const TerminalTable> FundamentalSolution::terminal(double t, double y) const {
  const auto key = std::make_pair(t, y);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto table = std::make_shared<const TerminalTable>(*this, t, y);
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, table);
  return it->second;
}

std::size_t FundamentalSolution::cached_terminals() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

double FundamentalSolution::Q(double s, double x, double t, double y) const {
  require_time_order(s, t, "Q");
  if (trivial_) return 0.0;
  if (constant_ && t <= horizon_) return terminal(horizon_, 0.0)->q(s + (horizon_ - t), x - y);
  return terminal(t, y)->q(s, x);
}

double FundamentalSolution::correction(double s, double x, double t, double y, int p) const {
  require_time_order(s, t, "correction kernel");
  if (trivial_) return 0.0;
  if (constant_ && t <= horizon_) {
    const double shifted = s + (horizon_ - t);
    if (!(shifted < horizon_)) return 0.0;
    return correction_with(*terminal(horizon_, 0.0), shifted, x - y, p);
  }
  return correction_with(*terminal(t, y), s, x, p);
}

double FundamentalSolution::correction_with(const TerminalTable& table, double s, double x, int p) const {
  const double t = table.t(), y = table.y();
  require_time_order(s, t, "correction kernel");
  const TerminalTable* tab = &table;
  const double T = t - s;
  const double R = settings_.r_cut;
  const double wB = std::sqrt(b_hi_);
  const QuadratureRule& tr = sine_squared(settings_.eval_time_nodes);
  const QuadratureRule& gl = gauss_legendre(settings_.eval_space_nodes);
  double acc = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double dlt = T * tr.nodes[k];
    const double sig = T - dlt;
    const double tau = s + dlt;
    if (!(tau > s)) continue;
    const auto ls = tab->stencil(std::sqrt(sig));
    const double half_q = tab->support_halfwidth(sig);
    const double lo = std::max(x - R * wB * std::sqrt(dlt), y - half_q);
    const double hi = std::min(x + R * wB * std::sqrt(dlt), y + half_q);
    if (!(hi > lo)) continue;
    const double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double inner = 0.0;
    for (std::size_t j = 0; j < gl.size(); ++j) {
      const double z = mid + hw * gl.nodes[j];
      inner += gl.weights[j] * principal(s, x, tau, z, p) * tab->q_at(ls, z);
    }
    acc += tr.weights[k] * inner * hw;
  }
  return acc * T;
}

double FundamentalSolution::eval(double s, double x, double t, double y, int p) const {
  return principal(s, x, t, y, p) + correction(s, x, t, y, p);
}

double FundamentalSolution::principal_action(double s, double x, double t, const std::function<double(double)>& psi,
                                             int p, double psi_resolution,
                                             const std::vector<double>& breakpoints) const {
  require_time_order(s, t, "principal action");
  const double sig = t - s;
  const double R = settings_.r_cut;
  const double lo = x - R * std::sqrt(b_hi_ * sig), hi = x + R * std::sqrt(b_hi_ * sig);
  const double h = std::min(std::sqrt(b_lo_ * sig), 4.0 * psi_resolution);
  std::vector<double> cuts{lo};
  for (double c : breakpoints)
    if (c > lo && c < hi) cuts.push_back(c);
  cuts.push_back(hi);
  double acc = 0.0;
  auto f = [&](double y) { return principal(s, x, t, y, p) * psi(y); };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) acc += composite(cuts[k], cuts[k + 1], h, 8, f, 4000);
  return acc;
}

std::shared_ptr<const CorrectionField> FundamentalSolution::terminal_field(double t, double s_min, double z_lo,
                                                                           double z_hi,
                                                                           std::function<double(double)> psi,
                                                                           double psi_resolution) const {
  return std::make_shared<const CorrectionField>(*this, t, s_min, z_lo, z_hi, CorrectionField::SeedKind::Terminal,
                                                 std::move(psi), nullptr, psi_resolution);
}

std::shared_ptr<const CorrectionField> FundamentalSolution::source_field(double t, double s_min, double z_lo,
                                                                         double z_hi,
                                                                         std::function<double(double, double)> f) const {
  return std::make_shared<const CorrectionField>(*this, t, s_min, z_lo, z_hi, CorrectionField::SeedKind::Source,
                                                 nullptr, std::move(f), 1.0);
}

double FundamentalSolution::action(double s, double x, double t, const std::function<double(double)>& psi, int p,
                                   double psi_resolution) const {
  double v = principal_action(s, x, t, psi, p, psi_resolution);
  if (trivial_) return v;
  const double m = settings_.field_margin * settings_.r_cut * std::sqrt(b_hi_ * (t - s));
  auto field = terminal_field(t, s, x - m, x + m, psi, psi_resolution);
  return v + field->apply(s, x, p);
}

double FundamentalSolution::duhamel(double s, double x, double t,
                                    const std::function<double(double, double)>& f) const {
  require_time_order(s, t, "duhamel");
  const double m = settings_.field_margin * settings_.r_cut * std::sqrt(b_hi_ * (t - s));
  if (trivial_) {
    // Fs = f exactly; apply Z0 directly
    auto field = std::make_shared<CorrectionField>(*this, t, s, x - m, x + m, CorrectionField::SeedKind::Source,
                                                   nullptr, f, 1.0);
    return field->apply(s, x, 0);
  }
  auto field = source_field(t, s, x - m, x + m, f);
  return field->apply(s, x, 0);
}

// ------------------------------------------------------------------ TerminalTable

TerminalTable::TerminalTable(const FundamentalSolution& g, double t, double y, int depth_override)
    : t_(t), y_(y) {
  const ParametrixSettings& st = g.settings_;
  if (!(t > g.s_floor_)) throw Error(ErrorCode::TimeOrder, "terminal time must exceed the start of the horizon");
  w_ = std::sqrt(g.b_hi_);
  rmax_ = std::sqrt(t - g.s_floor_);
  L_ = st.time_levels;
  r_.resize(L_ + 1);
  r_[0] = rmax_ * 1e-4;
  for (int l = 1; l <= L_; ++l) r_[l] = rmax_ * l / L_;
  eta_max_ = st.r_cut;
  const int half = static_cast<int>(std::ceil(eta_max_ / (st.eta_step * std::sqrt(g.b_lo_ / g.b_hi_))));
  deta_ = eta_max_ / half;
  neta_ = 2 * half + 1;
  u_.assign(static_cast<std::size_t>(L_ + 1) * neta_, 0.0);

  const int max_depth = depth_override > 0 ? depth_override : st.max_depth;
  std::vector<double> term(u_.size());
  for (int l = 0; l <= L_; ++l)
    for (int m = 0; m < neta_; ++m) {
      const double sig = r_[l] * r_[l];
      const double z = y + w_ * r_[l] * (-eta_max_ + m * deta_);
      term[l * neta_ + m] = sig * g.seed_kernel(t - sig, z, t, y);
    }
  double first_sup = 0.0;
  for (double v : term) first_sup = std::max(first_sup, std::abs(v));
  term_sup_.push_back(first_sup);
  for (std::size_t k = 0; k < u_.size(); ++k) u_[k] = term[k];
  if (first_sup == 0.0) return;

  const QuadratureRule& tr = sine_squared(st.conv_time_nodes);
  const QuadratureRule& gl = gauss_legendre(st.conv_space_nodes);
  const double R = st.r_cut;
  const double wB = std::sqrt(g.b_hi_);
  bool converged = false;
  for (int depth = 2; depth <= max_depth; ++depth) {
    std::vector<double> next(u_.size(), 0.0);
    parallel_for(static_cast<std::size_t>(L_ + 1), [&](std::size_t l) {
      const double sig = r_[l] * r_[l];
      const double tau = t - sig;
      std::vector<LevelStencil> stencils(tr.size());
      for (std::size_t k = 0; k < tr.size(); ++k) stencils[k] = stencil(std::sqrt(sig * tr.nodes[k]));
      for (int m = 0; m < neta_; ++m) {
        const double z = y + w_ * r_[l] * (-eta_max_ + m * deta_);
        double acc = 0.0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
          const double sp = sig * tr.nodes[k];
          const double dlt = sig - sp;
          const double taup = t - sp;
          const double halfq = support_halfwidth(sp);
          const double lo = std::max(z - R * wB * std::sqrt(dlt), y - halfq);
          const double hi = std::min(z + R * wB * std::sqrt(dlt), y + halfq);
          if (!(hi > lo)) continue;
          const double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
          double inner = 0.0;
          for (std::size_t j = 0; j < gl.size(); ++j) {
            const double zp = mid + hw * gl.nodes[j];
            const double qv = interp(term, stencils[k], (zp - y) / (w_ * std::sqrt(sp)));
            if (qv == 0.0) continue;
            inner += gl.weights[j] * g.seed_kernel(tau, z, taup, zp) * qv * stencils[k].inv_r * stencils[k].inv_r;
          }
          acc += tr.weights[k] * inner * hw;
        }
        next[l * neta_ + m] = sig * acc * sig;
      }
    });
    double sup = 0.0;
    for (double v : next) sup = std::max(sup, std::abs(v));
    term_sup_.push_back(sup);
    for (std::size_t k = 0; k < u_.size(); ++k) u_[k] += next[k];
    term.swap(next);
    if (!std::isfinite(sup)) break;
    if (sup <= st.tol_Q * first_sup) {
      converged = true;
      break;
    }
  }
  if (!converged && depth_override <= 0)
    throw Error(ErrorCode::ConvergenceFailure,
                "parametrix series for Q did not reach tol_Q within depth " + std::to_string(max_depth) +
                    " (last term sup " + std::to_string(term_sup_.back()) + ")");
}

double TerminalTable::support_halfwidth(double sigma) const { return eta_max_ * w_ * std::sqrt(sigma); }

TerminalTable::LevelStencil TerminalTable::stencil(double r) const {
  LevelStencil ls;
  r = std::clamp(r, r_[0], rmax_);
  ls.inv_r = 1.0 / r;
  // levels 1..L are uniform; level 0 sits near zero
  int j = static_cast<int>(std::floor(r / rmax_ * L_));
  j = std::clamp(j, 0, L_ - 1);
  int first = std::clamp(j - 1, 0, std::max(0, L_ + 1 - 4));
  ls.first = first;
  ls.count = std::min(4, L_ + 1);
  lagrange_weights(&r_[first], ls.count, r, ls.w);
  return ls;
}

double TerminalTable::interp_row(const std::vector<double>& u, int level, double eta) const {
  if (std::abs(eta) > eta_max_) return 0.0;
  const double pos = (eta + eta_max_) / deta_;
  int first;
  double w[6];
  const int width = std::min(6, neta_);
  uniform_stencil(pos, neta_, width, first, w);
  const double* row = &u[static_cast<std::size_t>(level) * neta_];
  double v = 0.0;
  for (int k = 0; k < width; ++k) v += w[k] * row[first + k];
  return v;
}

double TerminalTable::interp(const std::vector<double>& u, const LevelStencil& ls, double eta) const {
  if (std::abs(eta) > eta_max_) return 0.0;
  const double pos = (eta + eta_max_) / deta_;
  int first;
  double w[6];
  const int width = std::min(6, neta_);
  uniform_stencil(pos, neta_, width, first, w);
  double v = 0.0;
  for (int l = 0; l < ls.count; ++l) {
    const double* row = &u[static_cast<std::size_t>(ls.first + l) * neta_];
    double rv = 0.0;
    for (int k = 0; k < width; ++k) rv += w[k] * row[first + k];
    v += ls.w[l] * rv;
  }
  return v;
}

double TerminalTable::q_at(const LevelStencil& ls, double z) const {
  const double eta = (z - y_) * ls.inv_r / w_;
  return interp(u_, ls, eta) * ls.inv_r * ls.inv_r;
}

double TerminalTable::q(double tau, double z) const {
  require_time_order(tau, t_, "Q table");
  const auto ls = stencil(std::sqrt(t_ - tau));
  return q_at(ls, z);
}

// ---------------------------------------------------------------- CorrectionField

CorrectionField::CorrectionField(const FundamentalSolution& g, double t, double s_min, double z_lo, double z_hi,
                                 SeedKind kind, std::function<double(double)> psi,
                                 std::function<double(double, double)> source, double psi_resolution)
    : g_(&g), t_(t) {
  require_time_order(s_min, t, "correction field");
  const ParametrixSettings& st = g.settings_;
  rmax_ = std::sqrt(t - s_min);
  L_ = st.time_levels;
  r_.resize(L_ + 1);
  r_[0] = rmax_ * 1e-4;
  for (int l = 1; l <= L_; ++l) r_[l] = rmax_ * l / L_;
  nz_ = std::max(8, static_cast<int>(std::ceil((z_hi - z_lo) / st.field_step)) + 1);
  dz_ = (z_hi - z_lo) / (nz_ - 1);
  z0_ = z_lo;
  u_.assign(static_cast<std::size_t>(L_ + 1) * nz_, 0.0);

  const double R = st.r_cut;
  const double B = g.b_hi_, b = g.b_lo_;
  std::vector<double> term(u_.size());
  parallel_for(static_cast<std::size_t>(L_ + 1), [&](std::size_t l) {
    const double sig = r_[l] * r_[l];
    const double tau = t - sig;
    for (int k = 0; k < nz_; ++k) {
      const double z = z0_ + dz_ * k;
      double v;
      if (kind == SeedKind::Source) {
        v = source(tau, z);
      } else {
        const double half = R * std::sqrt(B * sig);
        const double h = std::min(std::sqrt(b * sig), 4.0 * psi_resolution);
        v = composite(z - half, z + half, h, 8, [&](double yy) { return g.seed_kernel(tau, z, t, yy) * psi(yy); }, 4000);
      }
      term[l * nz_ + k] = r_[l] * v;
    }
  });
  double first_sup = 0.0;
  for (double v : term) first_sup = std::max(first_sup, std::abs(v));
  term_sup_.push_back(first_sup);
  u_ = term;
  if (first_sup == 0.0 || g.trivial()) return;

  const QuadratureRule& tr = sine_squared(st.conv_time_nodes);
  const int npan = 6;
  bool converged = false;
  for (int depth = 2; depth <= st.max_depth; ++depth) {
    std::vector<double> next(u_.size(), 0.0);
    parallel_for(static_cast<std::size_t>(L_ + 1), [&](std::size_t l) {
      const double sig = r_[l] * r_[l];
      const double tau = t - sig;
      struct Stencil {
        int first, count;
        double w[4];
        double inv_r;
      };
      std::vector<Stencil> stencils(tr.size());
      for (std::size_t q = 0; q < tr.size(); ++q)
        level_stencil(std::sqrt(sig * tr.nodes[q]), stencils[q].first, stencils[q].count, stencils[q].w,
                      stencils[q].inv_r);
      for (int k = 0; k < nz_; ++k) {
        const double z = z0_ + dz_ * k;
        double acc = 0.0;
        for (std::size_t q = 0; q < tr.size(); ++q) {
          const double sp = sig * tr.nodes[q];
          const double dlt = sig - sp;
          const double taup = t - sp;
          const double lo = std::max(z - R * std::sqrt(B * dlt), z0_);
          const double hi = std::min(z + R * std::sqrt(B * dlt), z_hi);
          const double h = std::min(4.0 * std::sqrt(b * dlt), st.field_feature);
          const Stencil& sc = stencils[q];
          acc += tr.weights[q] * composite(lo, hi, h, npan, [&](double zp) {
                   return g.seed_kernel(tau, z, taup, zp) * interp(term, sc.first, sc.count, sc.w, sc.inv_r, zp);
                 });
        }
        next[l * nz_ + k] = r_[l] * acc * sig;
      }
    });
    double sup = 0.0;
    for (double v : next) sup = std::max(sup, std::abs(v));
    term_sup_.push_back(sup);
    for (std::size_t k = 0; k < u_.size(); ++k) u_[k] += next[k];
    term.swap(next);
    if (!std::isfinite(sup)) break;
    if (sup <= st.tol_Q * first_sup) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorCode::ConvergenceFailure,
                "parametrix field series did not reach tol_Q within depth " + std::to_string(st.max_depth));
}

void CorrectionField::level_stencil(double r, int& first, int& count, double* w, double& inv_r) const {
  r = std::clamp(r, r_[0], rmax_);
  inv_r = 1.0 / r;
  int j = static_cast<int>(std::floor(r / rmax_ * L_));
  j = std::clamp(j, 0, L_ - 1);
  first = std::clamp(j - 1, 0, std::max(0, L_ + 1 - 4));
  count = std::min(4, L_ + 1);
  lagrange_weights(&r_[first], count, r, w);
}

double CorrectionField::interp(const std::vector<double>& u, int first, int count, const double* w, double inv_r,
                               double z) const {
  const double pos = (z - z0_) / dz_;
  if (pos < 0.0 || pos > nz_ - 1) return 0.0;
  int zf;
  double wz[6];
  const int width = std::min(6, nz_);
  uniform_stencil(pos, nz_, width, zf, wz);
  double v = 0.0;
  for (int l = 0; l < count; ++l) {
    const double* row = &u[static_cast<std::size_t>(first + l) * nz_];
    double rv = 0.0;
    for (int k = 0; k < width; ++k) rv += wz[k] * row[zf + k];
    v += w[l] * rv;
  }
  return v * inv_r;
}

double CorrectionField::value(double tau, double z) const {
  require_time_order(tau, t_, "correction field value");
  int first, count;
  double w[4], inv_r;
  level_stencil(std::sqrt(t_ - tau), first, count, w, inv_r);
  return interp(u_, first, count, w, inv_r, z);
}

double CorrectionField::apply(double s, double x, int p) const {
  require_time_order(s, t_, "correction field apply");
  if (s < s_min() - 1e-12 * (1.0 + std::abs(s)))
    throw Error(ErrorCode::MeshMismatch, "field does not cover the requested start time");
  const ParametrixSettings& st = g_->settings_;
  const double T = t_ - s;
  const double R = st.r_cut;
  const double B = g_->b_hi_, b = g_->b_lo_;
  const QuadratureRule& tr = sine_squared(st.eval_time_nodes);
  double acc = 0.0;
  for (std::size_t q = 0; q < tr.size(); ++q) {
    const double dlt = T * tr.nodes[q];
    const double tau = s + dlt;
    if (!(tau > s)) continue;
    int first, count;
    double w[4], inv_r;
    level_stencil(std::sqrt(t_ - tau), first, count, w, inv_r);
    const double lo = std::max(x - R * std::sqrt(B * dlt), z0_);
    const double hi = std::min(x + R * std::sqrt(B * dlt), z_hi());
    const double h = std::min(2.0 * std::sqrt(b * dlt), st.field_feature);
    acc += tr.weights[q] * composite(lo, hi, h, 6, [&](double z) {
             return g_->principal(s, x, tau, z, p) * interp(u_, first, count, w, inv_r, z);
           });
  }
  return acc * T;
}

// -------------------------------------------------------------------- audits

MomentResiduals check_moment_identities(const FundamentalSolution& g, double s, double x, double t) {
  require_time_order(s, t, "moment identities");
  MomentResiduals r;
  r.mass = g.action(s, x, t, [](double) { return 1.0; });
  r.mean = g.action(s, x, t, [x](double y) { return y - x; });
  r.second = g.action(s, x, t, [x](double y) { return (y - x) * (y - x); });
  const double drift = g.duhamel(s, x, t, [&g](double tau, double z) { return g.a(tau, z); });
  const double spread =
      g.duhamel(s, x, t, [&g, x](double tau, double z) { return g.b(tau, z) + 2.0 * g.a(tau, z) * (z - x); });
  r.r0 = std::abs(r.mass - 1.0);
  r.r1 = std::abs(r.mean - drift);
  r.r2 = std::abs(r.second - spread);
  return r;
}

CorrectionAudit audit_correction(const FundamentalSolution& g, double t, const std::vector<double>& ys,
                                 const std::vector<double>& xs, const std::vector<double>& dts) {
  CorrectionAudit a;
  a.c = 1.0 / (4.0 * g.b_upper());
  a.min_G = std::numeric_limits<double>::infinity();
  const double alpha = g.holder_exponent();
  for (double y : ys)
    for (double dt : dts)
      for (double x : xs) {
        const double s = t - dt;
        const double z1 = g.correction(s, x, t, y);
        const double G = g.principal(s, x, t, y) + z1;
        a.min_G = std::min(a.min_G, G);
        a.C = std::max(a.C, std::abs(z1) * std::pow(dt, 0.5 * (1.0 - alpha)) * std::exp(a.c * (y - x) * (y - x) / dt));
        ++a.samples;
      }
  return a;
}

}  // namespace membrane
