#include "membrane/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "membrane/error.hpp"
#include "membrane/mc_oracle.hpp"
#include "membrane/parametrix.hpp"
#include "membrane/semigroup.hpp"

namespace membrane {

using nlohmann::json;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

SemigroupSettings semigroup_settings(const RunConfig& c) {
  SemigroupSettings st;
  st.solver = c.solver;
  return st;
}

std::string case_of(const RunConfig& c) { return c.name.empty() ? "config" : c.name; }

bool zero_drift(const Problem& p) {
  for (int i : {1, 2})
    if (!p.side(i).drift.is_constant() || p.side(i).drift(0.0, 0.0) != 0.0) return false;
  return true;
}

// constant equal diffusions, no drift, fixed membrane, constant q, no atoms
bool skew_family(const Problem& p) {
  return zero_drift(p) && p.constant_side(1) && p.constant_side(2) && p.b(1, 0, 0) == p.b(2, 0, 0) &&
         p.membrane.is_constant() && p.wentzell.q1.is_constant() && p.wentzell.q2.is_constant() && !p.has_atoms();
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// phi sampled on a uniform grid of spacing dx wide enough for T_st at the audit grid
InitialFunction tabulate(const InitialFunction& phi, const Problem& p, double dt, double dx) {
  const double margin = 8.0 * std::sqrt(p.upper_diffusion_bound() * dt) + 1.0;
  const double lo = p.grid.x_min - margin, hi = p.grid.x_max + margin;
  const int n = static_cast<int>(std::ceil((hi - lo) / dx));
  std::vector<double> x, v;
  for (int k = 0; k <= n; ++k) {
    x.push_back(lo + (hi - lo) * k / n);
    v.push_back(phi(x.back()));
  }
  return InitialFunction::tabulated(x, v);
}

void semigroup_suite(const RunConfig& c, Report& r) {
  SemigroupOperator op(c.problem, semigroup_settings(c));
  const Problem& p = c.problem;
  const InitialFunction& phi = c.phi;
  const std::string cs = case_of(c);
  const double s = c.check.s, tau = c.check.tau, t = c.check.t;
  const std::vector<double> grid = op.audit_grid();
  const double norm = phi.sup_norm();

  {
    std::vector<double> ref(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) ref[k] = phi(grid[k]);
    r.add_bound("identity", cs, sup_diff(op.apply(s, s, phi, grid), ref), 0.0);
  }
  std::vector<std::pair<double, double>> pairs{{s, t}};
  if (tau > s && tau < t) pairs.insert(pairs.end(), {{s, tau}, {tau, t}});
  for (auto [a, b] : pairs)
    r.add_bound("conservation", cs, op.check_conservation(a, b), 1e-3, json{{"s", a}, {"t", b}});

  for (double mid : {s, t}) {
    const ChapmanKolmogorov ck = op.check_chapman_kolmogorov(s, mid, t, phi);
    r.add_bound("chapman-kolmogorov-trivial", cs, ck.discrepancy, 1e-6,
                json{{"s", s}, {"tau", mid}, {"t", t}, {"retab_nodes", ck.retab_nodes}});
  }
  if (tau > s && tau < t) {
    const ChapmanKolmogorov ck = op.check_chapman_kolmogorov(s, tau, t, phi);
    r.add_bound("chapman-kolmogorov", cs, ck.discrepancy, c.check.ck_tolerance,
                json{{"s", s}, {"tau", tau}, {"t", t}, {"retab_spacing", ck.retab_spacing}, {"retab_nodes", ck.retab_nodes}});
  }

  const PositivityContraction pc = op.check_positivity_contraction(s, t, phi);
  bool nonnegative = true;
  for (double x : grid) nonnegative = nonnegative && phi(x) >= 0.0;
  if (nonnegative && norm > 0)
    r.add_bound("positivity", cs, std::max(0.0, -pc.min_value) / norm, 1e-4, json{{"min", pc.min_value}});
  if (norm > 0)
    r.add_bound("contraction", cs, pc.sup_norm / norm - 1.0, 1e-3, json{{"sup", pc.sup_norm}, {"phi_norm", norm}});

  {
    std::vector<InitialFunction> seq;
    std::vector<double> spacing{0.25, 0.125, 0.0625};
    for (double dx : spacing) seq.push_back(tabulate(phi, p, t - s, dx));
    const std::vector<double> d = op.check_continuity(s, t, seq, phi);
    r.add_bound("continuity", cs, d.back(), 1e-4 * std::max(norm, 1.0), json{{"spacing", spacing}, {"discrepancy", d}});
  }

  const bool heat = skew_family(p) && p.wentzell.q1(0.0) == p.wentzell.q2(0.0) && phi.kind() == InitialFunction::Kind::GaussianBump;
  if (heat) {
    const auto& q = phi.params();  // amplitude, center, width
    const double b = p.b(1, 0, 0), v = q[2] * q[2] + b * (t - s);
    std::vector<double> ref(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      ref[k] = q[0] * q[2] / std::sqrt(v) * std::exp(-(grid[k] - q[1]) * (grid[k] - q[1]) / (2 * v));
    r.add_bound("heat-oracle", cs, sup_diff(op.apply(s, t, phi, grid), ref), 1e-3);
  } else if (skew_family(p)) {
    const SkewParams sp = SkewParams::from_problem(p, s);
    const double h = p.h(s);
    const auto shifted = [&](double y) { return phi(y + h); };
    std::vector<double> ref(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) ref[k] = skew_action(sp, t - s, grid[k] - h, shifted);
    r.add_bound("skew-oracle", cs, sup_diff(op.apply(s, t, phi, grid), ref), 1e-2, json{{"alpha", sp.alpha}});
  }
}

void conjugation_suite(const RunConfig& c, Report& r) {
  SemigroupOperator op(c.problem, semigroup_settings(c));
  const std::string cs = case_of(c);
  const double s = c.check.s, t = c.check.t;
  const double norm = c.phi.sup_norm();
  const Conjugation cj = op.check_conjugation(s, t, c.phi);
  r.add_bound("conjugation-B1", cs, cj.b1, 1e-3 * norm, json{{"nodes", cj.s.size()}});
  r.add_bound("conjugation-B2", cs, cj.b2, 5e-3 * norm, json{{"nodes", cj.s.size()}});
  const auto d = op.densities(s, t, c.phi);
  const std::vector<double> fk = op.system().first_kind_residual(*d, c.phi);
  double m = 0.0;
  for (double v : fk) m = std::max(m, std::abs(v));
  r.add_bound("first-kind-residual", cs, m, 1e-3 * norm);
  r.add_bound("series-contraction", cs, d->contraction_start, op.system().settings().k0,
              json{{"contraction_ratio", d->contraction_ratio},
                   {"terms", d->term_sup.size()},
                   {"delta", finite_or_null(d->delta)},
                   {"m_delta", d->m_delta}});
}

void generator_suite(const RunConfig& c, Report& r) {
  const Problem& p = c.problem;
  SemigroupOperator op(p, semigroup_settings(c));
  const std::string cs = case_of(c);
  const double s = c.check.s;

  {
    Problem spot;
    spot.wentzell.q1 = TimeFunction::constant(0.0);
    spot.wentzell.q2 = TimeFunction::constant(1.0);
    spot.left.diffusion = spot.right.diffusion = CoefficientField::constant(1.0);
    r.add_bound("a0-spot-check", "q1=0,q2=1,b=1", std::abs(EffectiveCoefficients(spot).a0(0.0) - 1.0), 4 * kEps);
  }
  double lsum = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double sk = p.horizon * k / 16;
    lsum = std::max(lsum, std::abs(p.l(1, sk) + p.l(2, sk) - 1.0));
  }
  r.add_bound("l-weights-sum", cs, lsum, 4 * kEps);

  const TestFunction f = TestFunction::bump(c.check.f_center, c.check.f_radius);
  const WeakGenerator wg = op.weak_generator_pairing(s, c.phi, f, c.check.dts);
  std::vector<double> err;
  for (double v : wg.lhs) err.push_back(std::abs(v - wg.rhs));
  int increases = 0;
  for (std::size_t k = 1; k < err.size(); ++k) increases += err[k] >= err[k - 1] ? 1 : 0;
  const json detail{{"dt", wg.dt}, {"lhs", wg.lhs}, {"rhs", wg.rhs}, {"bulk", wg.bulk}, {"boundary", wg.boundary}, {"error", err}};
  r.add_bound("weak-generator-monotone", cs, increases, 0.0, detail);
  if (!err.empty()) r.add_bound("weak-generator-limit", cs, err.back(), 5e-2 * (std::abs(wg.rhs) + 1.0), detail);

  const DomainCheck dc = op.generator_domain_check(s, c.phi, c.check.domain_dts, c.check.domain_x);
  const json ddetail{{"residual_1", dc.residual_1}, {"residual_2", dc.residual_2}, {"in_domain", dc.in_domain}};
  if (dc.in_domain) {
    json d = ddetail;
    d["dt"] = dc.dt;
    d["sup_error"] = dc.sup_error;
    r.add_bound("generator-domain-limit", cs, dc.sup_error.back(), 5e-3, d);
  } else {
    CheckResult skipped;
    skipped.check = "generator-domain-limit";
    skipped.case_name = cs;
    skipped.statistic = std::max(dc.residual_1, dc.residual_2);
    skipped.tolerance = op.settings().tol_dom;
    skipped.pass = true;
    skipped.detail = ddetail;
    skipped.detail["skipped"] = "phi is outside the generator domain";
    r.add(skipped);
  }

  if (!p.has_atoms() && !c.check.dts.empty()) {
    const double h = p.h(s);
    std::vector<double> ratio;
    for (double dt : c.check.dts) ratio.push_back(op.transition_moments(s, h, s + dt).fourth / dt);
    int bad = 0;
    for (std::size_t k = 1; k < ratio.size(); ++k) bad += ratio[k] >= ratio[k - 1] ? 1 : 0;
    r.add_bound("fourth-moment-vanishes", cs, bad, 0.0, json{{"dt", c.check.dts}, {"fourth_over_dt", ratio}});
    const double dt = *std::min_element(c.check.dts.begin(), c.check.dts.end());
    const MomentLimits ml = op.moment_limits(s, dt, f);
    const json mdetail{{"dt", dt},
                       {"mean_pairing", ml.mean_pairing},
                       {"drift_target", ml.drift_target},
                       {"second_pairing", ml.second_pairing},
                       {"diffusion_target", ml.diffusion_target}};
    r.add_bound("drift-limit", cs, std::abs(ml.mean_pairing - ml.drift_target),
                0.1 * std::max(std::abs(ml.drift_target), 0.1), mdetail);
    r.add_bound("diffusion-limit", cs, std::abs(ml.second_pairing - ml.diffusion_target),
                0.1 * std::max(std::abs(ml.diffusion_target), 0.1), mdetail);
  }
}

void parametrix_suite(const RunConfig& c, Report& r) {
  const std::string cs = case_of(c);
  const double s = c.check.s, t = c.check.t;
  for (int i : {1, 2}) {
    const FundamentalSolution g(c.problem, i, c.solver.potentials.parametrix);
    const double x = c.check.f_center;
    const MomentResiduals m = check_moment_identities(g, s, x, t);
    const std::string side = i == 1 ? "left" : "right";
    const json detail{{"side", side}, {"s", s}, {"x", x}, {"t", t}, {"mass", m.mass}, {"mean", m.mean}, {"second", m.second}};
    r.add_bound("moment-r0", cs, m.r0, 1e-3, detail);
    r.add_bound("moment-r1", cs, m.r1, 1e-3, detail);
    r.add_bound("moment-r2", cs, m.r2, 1e-3, detail);
    if (g.trivial()) continue;
    const FundamentalSolution fine(c.problem, i, g.settings().refined());
    const MomentResiduals mf = check_moment_identities(fine, s, x, t);
    const double worst = std::max({mf.r0 / std::max(m.r0 / 2, 1e-9), mf.r1 / std::max(m.r1 / 2, 1e-9),
                                   mf.r2 / std::max(m.r2 / 2, 1e-9)});
    r.add_bound("moment-refinement", cs, worst, 1.0,
                json{{"side", side}, {"coarse", {m.r0, m.r1, m.r2}}, {"refined", {mf.r0, mf.r1, mf.r2}}});
  }
}

const char* side_name(Side s) {
  switch (s) {
    case Side::Left:
      return "left";
    case Side::Right:
      return "right";
    default:
      return "membrane";
  }
}

}  // namespace

void require_valid(const RunConfig& c) {
  const ValidationReport v = validate(c.problem, c.problem.grid.resolution, c.phi);
  std::string failed;
  for (const ConditionResult& cond : v.conditions)
    if (!cond.pass) failed += (failed.empty() ? "" : ", ") + cond.condition + " (" + cond.description + ")";
  if (!failed.empty()) throw Error(ErrorCode::InvalidInput, "problem fails condition " + failed);
}

Report run_check_suite(const RunConfig& c, const std::string& suite) {
  Report r;
  r.command = "check";
  r.suite = suite;
  r.case_name = case_of(c);
  if (suite != "semigroup" && suite != "conjugation" && suite != "generator" && suite != "parametrix")
    throw Error(ErrorCode::InvalidInput, "unknown suite '" + suite + "'");
  require_valid(c);
  if (suite == "semigroup")
    semigroup_suite(c, r);
  else if (suite == "conjugation")
    conjugation_suite(c, r);
  else if (suite == "generator")
    generator_suite(c, r);
  else
    parametrix_suite(c, r);
  return r;
}

Report run_compare_mc(const RunConfig& c) {
  Report r;
  r.command = "compare-mc";
  r.suite = "mc";
  r.case_name = case_of(c);
  require_valid(c);
  SemigroupOperator op(c.problem, semigroup_settings(c));
  for (double x : c.mc.x) {
    const double solver = op.value(c.mc.s, x, c.mc.t, c.phi);
    const SimResult sim = simulate(c.problem, c.mc.s, x, c.mc.t, c.phi, c.mc.sim);
    const Comparison cmp = compare(solver, sim.mean, sim.stderr_, c.mc.k_sigma);
    json detail{{"x", x},
                {"s", c.mc.s},
                {"t", c.mc.t},
                {"solver", solver},
                {"mc", sim.mean},
                {"stderr", sim.stderr_},
                {"paths", sim.paths},
                {"steps", sim.steps},
                {"seed", c.mc.sim.seed},
                {"scheme", c.mc.sim.scheme == Scheme::EulerSkew ? "euler-skew" : "exact-gaussian-increment"},
                {"double_cross_fraction", sim.double_cross_fraction},
                {"jumps", sim.jumps}};
    if (c.problem.has_atoms()) detail["bias"] = "thin-layer jump scheme, first order in dt";
    CheckResult cr;
    cr.check = "mc-compare";
    cr.case_name = case_of(c) + " x=" + format_number(x, 12);
    cr.statistic = cmp.z;
    cr.tolerance = c.mc.k_sigma;
    cr.pass = cmp.pass;
    cr.detail = std::move(detail);
    r.add(std::move(cr));
  }
  return r;
}

Report run_validate(const RunConfig& c) {
  Report r;
  r.command = "validate";
  r.suite = "problem";
  r.case_name = case_of(c);
  const ValidationReport v = validate(c.problem, c.problem.grid.resolution, c.phi);
  for (const ConditionResult& cond : v.conditions) {
    CheckResult cr;
    cr.check = "condition-" + cond.condition;
    cr.case_name = case_of(c);
    cr.statistic = cond.statistic;
    cr.tolerance = cond.threshold;
    cr.pass = cond.pass;
    cr.detail = json{{"description", cond.description}};
    r.add(std::move(cr));
  }
  return r;
}

std::string solve_csv(const RunConfig& c) {
  require_valid(c);
  SemigroupOperator op(c.problem, semigroup_settings(c));
  const std::vector<double> xs = c.solve.x.empty() ? op.audit_grid() : c.solve.x;
  std::string out = "s,x,u,side\n";
  for (double s : c.solve.s) {
    const std::vector<double> u = op.apply(s, c.solve.t, c.phi, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      out += format_number(s, c.precision) + "," + format_number(xs[k], c.precision) + "," +
             format_number(u[k], c.precision) + "," + side_name(side_of(c.problem, s, xs[k])) + "\n";
    }
  }
  return out;
}

json kernel_dump_json(const RunConfig& c) {
  require_valid(c);
  const BoundarySystem sys(c.problem, c.solver);
  const double s_min = *std::min_element(c.solve.s.begin(), c.solve.s.end());
  require_time_order(s_min, c.solve.t, "kernel dump");
  KernelDump dump;
  const DensityPair d = sys.solve_densities(c.phi, c.solve.t, s_min, &dump);
  return json{{"t", c.solve.t},
              {"s_min", s_min},
              {"mesh", {{"s", dump.mesh.s}, {"r", dump.mesh.r}}},
              {"rhs", {{"phi0", dump.rhs.phi0}, {"psi", dump.rhs.psi}, {"phi", dump.rhs.phi}}},
              {"tilde_n", dump.tilde_n},
              {"w1", d.nodes(1)},
              {"w2", d.nodes(2)},
              {"term_sup", dump.term_sup},
              {"contraction_start", d.contraction_start},
              {"contraction_ratio", d.contraction_ratio},
              {"delta", finite_or_null(dump.delta)},
              {"m_delta", dump.m_delta}};
}

}  // namespace membrane
