#include "membrane/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "membrane/problem_json.hpp"

namespace membrane {

using namespace json_util;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, what + ": malformed JSON: " + e.what());
  }
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0)) fail(path, "must be positive");
  return v;
}

std::vector<double> x_list(const json& j, const std::string& path) {
  if (j.is_array()) {
    auto xs = numbers(j, path);
    if (xs.empty()) fail(path, "must not be empty");
    return xs;
  }
  require_object(j, path, {"min", "max", "count"});
  const double lo = number(member(j, path, "min"), join(path, "min"));
  const double hi = number(member(j, path, "max"), join(path, "max"));
  const int n = integer(member(j, path, "count"), join(path, "count"));
  if (n < 1) fail(join(path, "count"), "must be >= 1");
  if (n > 1 && !(lo < hi)) fail(path, "min must be below max");
  std::vector<double> xs;
  for (int k = 0; k < n; ++k) xs.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  return xs;
}

void require_times(double s, double t, const Problem& p, const std::string& path) {
  if (!(s >= 0 && s <= t && t <= p.horizon)) fail(path, "need 0 <= s <= t <= horizon");
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
  require_object(j, "", {"schema_version", "name", "problem", "phi", "solve", "check", "mc", "solver", "precision"});
  if (j.contains("schema_version") && integer(j["schema_version"], "schema_version") != kConfigSchemaVersion)
    fail("schema_version", "unsupported version");
  RunConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    c.name = j["name"].get<std::string>();
  }
  const json& pj = member(j, "", "problem");
  if (pj.is_string()) {
    const std::filesystem::path file = std::filesystem::path(base_dir) / pj.get<std::string>();
    c.problem = problem_from_json(parse_text(read_file(file.string()), file.string()));
  } else {
    try {
      c.problem = problem_from_json(pj);
    } catch (const Error& e) {
      const std::string& msg = e.message();
      const auto at = msg.find("key '");
      if (e.code() != ErrorCode::InvalidInput || at == std::string::npos) throw;
      throw Error(ErrorCode::InvalidInput, msg.substr(0, at) + "key 'problem." + msg.substr(at + 5));
    }
  }
  if (j.contains("phi")) c.phi = initial_function_from_json(j["phi"], "phi");

  if (j.contains("solve")) {
    const json& s = j["solve"];
    require_object(s, "solve", {"s", "t", "x"});
    if (s.contains("s")) {
      c.solve.s = s["s"].is_number() ? std::vector<double>{number(s["s"], "solve.s")} : numbers(s["s"], "solve.s");
      if (c.solve.s.empty()) fail("solve.s", "must not be empty");
    }
    c.solve.t = s.contains("t") ? number(s["t"], "solve.t") : c.problem.horizon;
    if (s.contains("x")) c.solve.x = x_list(s["x"], "solve.x");
  } else {
    c.solve.t = c.problem.horizon;
  }
  for (double s : c.solve.s) require_times(s, c.solve.t, c.problem, "solve");

  c.check.t = c.problem.horizon;
  c.check.tau = 0.5 * c.problem.horizon;
  if (j.contains("check")) {
    const json& k = j["check"];
    require_object(k, "check", {"s", "tau", "t", "dts", "test_function", "domain_x", "domain_dts", "ck_tolerance"});
    if (k.contains("s")) c.check.s = number(k["s"], "check.s");
    if (k.contains("t")) c.check.t = number(k["t"], "check.t");
    c.check.tau = k.contains("tau") ? number(k["tau"], "check.tau") : 0.5 * (c.check.s + c.check.t);
    if (k.contains("dts")) c.check.dts = numbers(k["dts"], "check.dts");
    if (k.contains("domain_x")) c.check.domain_x = x_list(k["domain_x"], "check.domain_x");
    if (k.contains("domain_dts")) c.check.domain_dts = numbers(k["domain_dts"], "check.domain_dts");
    if (k.contains("ck_tolerance")) c.check.ck_tolerance = positive(k["ck_tolerance"], "check.ck_tolerance");
    if (k.contains("test_function")) {
      const json& f = k["test_function"];
      require_object(f, "check.test_function", {"center", "radius"});
      c.check.f_center = number(member(f, "check.test_function", "center"), "check.test_function.center");
      c.check.f_radius = positive(member(f, "check.test_function", "radius"), "check.test_function.radius");
    }
  }
  require_times(c.check.s, c.check.t, c.problem, "check");
  if (!(c.check.s < c.check.t)) fail("check", "need s < t");
  if (!(c.check.s <= c.check.tau && c.check.tau <= c.check.t)) fail("check.tau", "need s <= tau <= t");
  for (const auto* dts : {&c.check.dts, &c.check.domain_dts})
    for (double dt : *dts)
      if (!(dt > 0) || c.check.s + dt > c.problem.horizon) fail("check", "time steps must be positive and stay within the horizon");

  c.mc.t = c.problem.horizon;
  if (j.contains("mc")) {
    const json& m = j["mc"];
    require_object(m, "mc", {"s", "t", "x", "paths", "dt", "seed", "k_sigma", "scheme"});
    if (m.contains("s")) c.mc.s = number(m["s"], "mc.s");
    if (m.contains("t")) c.mc.t = number(m["t"], "mc.t");
    if (m.contains("x")) c.mc.x = x_list(m["x"], "mc.x");
    if (m.contains("paths")) {
      const int n = integer(m["paths"], "mc.paths");
      if (n < 1) fail("mc.paths", "must be >= 1");
      c.mc.sim.paths = static_cast<std::size_t>(n);
    }
    if (m.contains("dt")) c.mc.sim.dt = positive(m["dt"], "mc.dt");
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned()) fail("mc.seed", "expected a non-negative integer");
      c.mc.sim.seed = m["seed"].get<std::uint64_t>();
    }
    if (m.contains("k_sigma")) c.mc.k_sigma = positive(m["k_sigma"], "mc.k_sigma");
    if (m.contains("scheme")) {
      const std::string s = m["scheme"].is_string() ? m["scheme"].get<std::string>() : "";
      if (s == "euler-skew")
        c.mc.sim.scheme = Scheme::EulerSkew;
      else if (s == "exact-gaussian-increment")
        c.mc.sim.scheme = Scheme::ExactGaussianIncrement;
      else
        fail("mc.scheme", "expected 'euler-skew' or 'exact-gaussian-increment'");
    }
  }
  require_times(c.mc.s, c.mc.t, c.problem, "mc");
  if (!(c.mc.s < c.mc.t)) fail("mc", "need s < t");

  if (j.contains("solver")) {
    const json& s = j["solver"];
    require_object(s, "solver", {"mesh_intervals", "tol_V", "k_max", "delta", "table_nodes"});
    if (s.contains("mesh_intervals")) c.solver.mesh_intervals = integer(s["mesh_intervals"], "solver.mesh_intervals");
    if (s.contains("tol_V")) c.solver.tol_V = positive(s["tol_V"], "solver.tol_V");
    if (s.contains("k_max")) c.solver.k_max = integer(s["k_max"], "solver.k_max");
    if (s.contains("delta")) c.solver.delta = number(s["delta"], "solver.delta");
    if (s.contains("table_nodes")) c.solver.table_nodes = integer(s["table_nodes"], "solver.table_nodes");
    if (c.solver.mesh_intervals < 3) fail("solver.mesh_intervals", "must be >= 3");
    if (c.solver.k_max < 1) fail("solver.k_max", "must be >= 1");
    if (c.solver.table_nodes < 8) fail("solver.table_nodes", "must be >= 8");
  }
  if (j.contains("precision")) {
    c.precision = integer(j["precision"], "precision");
    if (c.precision < 1 || c.precision > 17) fail("precision", "must lie in 1..17");
  }
  return c;
}

RunConfig run_config_from_text(const std::string& text, const std::string& base_dir) {
  return run_config_from_json(parse_text(text, "config"), base_dir);
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  return run_config_from_text(text, dir.empty() ? "." : dir.string());
}

}  // namespace membrane
