#include "membrane/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "membrane/error.hpp"
#include "membrane/parallel.hpp"
#include "membrane/quadrature.hpp"

namespace membrane {

namespace {

double normal_pdf(double z, double var) {
  return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

struct PathOutcome {
  double x = 0.0;
  int double_cross = 0;
  int jumps = 0;
};

}  // namespace

SkewParams SkewParams::from_problem(const Problem& p, double s) {
  const double h = p.h(s);
  const double b1 = p.b(1, s, h), b2 = p.b(2, s, h);
  if (std::abs(b1 - b2) > 1e-12 * std::max(b1, b2))
    throw Error(ErrorCode::InvalidInput, "skew parameters need b1 = b2 at the membrane");
  const double q1 = p.q(1, s), q2 = p.q(2, s);
  return {q2 * std::sqrt(b1) / (q2 * std::sqrt(b1) + q1 * std::sqrt(b2)), std::sqrt(b1)};
}

double skew_density(const SkewParams& params, double dt, double x, double y) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidInput, "skew density requires dt > 0");
  const double var = params.sigma * params.sigma * dt;
  const double a = params.alpha;
  if (x >= 0.0) {
    if (y > 0.0) return normal_pdf(y - x, var) + (2.0 * a - 1.0) * normal_pdf(y + x, var);
    return 2.0 * (1.0 - a) * normal_pdf(y - x, var);
  }
  if (y > 0.0) return 2.0 * a * normal_pdf(y - x, var);
  return normal_pdf(y - x, var) - (2.0 * a - 1.0) * normal_pdf(y + x, var);
}

double skew_action(const SkewParams& params, double dt, double x, const std::function<double(double)>& phi) {
  const QuadratureRule& gl = gauss_legendre(32);
  const double w = 12.0 * params.sigma * std::sqrt(dt);
  const double lo = std::min(x - w, -w), hi = std::max(x + w, w);
  const double width = 0.125 * params.sigma * std::sqrt(dt);
  double acc = 0.0;
  for (auto [a, b] : {std::pair{lo, 0.0}, std::pair{0.0, hi}}) {
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    for (int k = 0; k < panels; ++k)
      acc += integrate(gl, a + (b - a) * k / panels, a + (b - a) * (k + 1) / panels,
                       [&](double y) { return skew_density(params, dt, x, y) * phi(y); });
  }
  return acc;
}

SimResult simulate(const Problem& p, double s, double x, double t, const std::function<double(double)>& phi,
                   const SimConfig& config) {
  require_time_order(s, t, "simulate");
  if (config.paths < 1) throw Error(ErrorCode::InvalidInput, "simulate requires at least one path");
  if (!(config.dt > 0.0)) throw Error(ErrorCode::InvalidInput, "simulate requires dt > 0");
  const int steps = std::max(1, static_cast<int>(std::ceil((t - s) / config.dt - 1e-9)));
  const double dt = (t - s) / steps;
  const double layer = std::sqrt(p.upper_diffusion_bound() * dt);
  const auto& atoms = p.wentzell.atoms;

  // membrane data shared by all paths, per step
  std::vector<double> hk(static_cast<std::size_t>(steps) + 1), alpha(static_cast<std::size_t>(steps)),
      jump(static_cast<std::size_t>(steps), 0.0);
  std::vector<std::vector<double>> wk(static_cast<std::size_t>(steps));
  for (int k = 0; k <= steps; ++k) hk[static_cast<std::size_t>(k)] = p.h(s + k * dt);
  for (int k = 0; k < steps; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    const double tau = s + k * dt, hm = hk[kk];
    const double r1 = std::sqrt(p.b(1, tau, hm)), r2 = std::sqrt(p.b(2, tau, hm));
    const double q1 = p.q(1, tau), q2 = p.q(2, tau);
    alpha[kk] = q2 * r1 / (q2 * r1 + q1 * r2);
    if (atoms.empty()) continue;
    double total = 0.0;
    for (const Atom& a : atoms) {
      total += a.weight(tau);
      wk[kk].push_back(a.weight(tau));
    }
    jump[kk] = -std::expm1(-0.5 * (p.d(1, tau) + p.d(2, tau)) * total * dt / (2.0 * layer));
  }

  std::vector<PathOutcome> out(config.paths);
  parallel_for(config.paths, [&](std::size_t path) {
    std::mt19937_64 rng = path_engine(config.seed, path);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    PathOutcome o;
    double X = x;
    for (int k = 0; k < steps; ++k) {
      const std::size_t kk = static_cast<std::size_t>(k);
      const double tau = s + k * dt;
      const double h0 = hk[kk], h1 = hk[kk + 1];
      const int side = X < h0 ? 1 : (X > h0 ? 2 : 0);
      const double xi = normal(rng);
      if (config.scheme == Scheme::ExactGaussianIncrement) {
        const int i = side == 2 ? 2 : 1;
        X += p.a(i, tau, X) * dt + std::sqrt(p.b(i, tau, X) * dt) * xi;
        continue;
      }
      if (jump[kk] > 0.0 && std::abs(X - h0) < layer && uniform(rng) < jump[kk]) {
        const std::vector<double>& w = wk[kk];
        double pick = uniform(rng) * std::accumulate(w.begin(), w.end(), 0.0);
        std::size_t a = 0;
        while (a + 1 < w.size() && (pick -= w[a]) > 0.0) ++a;
        X = atoms[a].position(tau);
        ++o.jumps;
        continue;
      }
      const int i = side == 0 ? 1 : side;
      X += p.a(i, tau, X) * dt;
      // distance to the membrane in units of the local diffusion scale
      const double scale = std::sqrt(p.b(i, tau, X));
      const double z = (X - h1) / scale;
      const double r = std::abs(std::abs(z) + std::sqrt(dt) * xi);
      // P(the step reached the membrane | start |z|, reflected end r)
      const double e = std::exp(-2.0 * std::abs(z) * r / dt);
      const double hit = 2.0 * e / (1.0 + e);
      double sign = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
      if (sign == 0.0 || uniform(rng) < hit) {
        const double fresh = uniform(rng) < alpha[kk] ? 1.0 : -1.0;
        if (fresh == sign) ++o.double_cross;
        sign = fresh;
      }
      const int j = sign > 0.0 ? 2 : 1;
      const double to = j == i ? scale : std::sqrt(p.b(j, tau, h1));
      X = h1 + sign * r * to;
    }
    o.x = X;
    out[path] = o;
  });

  SimResult res;
  res.paths = config.paths;
  res.steps = steps;
  res.endpoints.resize(config.paths);
  double sum = 0.0, comp = 0.0, sum2 = 0.0, comp2 = 0.0;
  std::size_t crosses = 0;
  auto kahan = [](double& acc, double& c, double v) {
    const double y = v - c;
    const double tmp = acc + y;
    c = (tmp - acc) - y;
    acc = tmp;
  };
  for (std::size_t k = 0; k < config.paths; ++k) {
    res.endpoints[k] = out[k].x;
    const double v = phi(out[k].x);
    kahan(sum, comp, v);
    kahan(sum2, comp2, v * v);
    crosses += static_cast<std::size_t>(out[k].double_cross);
    res.jumps += static_cast<std::size_t>(out[k].jumps);
  }
  const double n = static_cast<double>(config.paths);
  res.mean = sum / n;
  const double var = config.paths > 1 ? std::max(0.0, (sum2 - n * res.mean * res.mean) / (n - 1.0)) : 0.0;
  res.stderr_ = std::sqrt(var / n);
  res.double_cross_fraction = static_cast<double>(crosses) / (n * steps);
  if (config.scheme == Scheme::EulerSkew && res.double_cross_fraction > config.max_double_cross)
    throw Error(ErrorCode::StepTooLarge, "more than " + std::to_string(config.max_double_cross * 100) +
                                             "% of steps reach the membrane and return; reduce dt");
  return res;
}

Comparison compare(double solver_value, double mc_estimate, double stderr_, double k_sigma) {
  const double diff = std::abs(solver_value - mc_estimate);
  Comparison c;
  if (stderr_ > 0.0) {
    c.z = diff / stderr_;
  } else {
    c.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  c.pass = c.z <= k_sigma;
  return c;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidInput, "KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace membrane
