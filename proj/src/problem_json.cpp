#include "membrane/problem_json.hpp"

#include <set>

#include "json_util.hpp"
#include "membrane/error.hpp"

namespace membrane {

using nlohmann::json;
using namespace json_util;

namespace {

void require_params(const std::vector<double>& p, std::size_t lo, std::size_t hi, const std::string& path) {
  if (p.size() < lo || p.size() > hi)
    fail(path, "expected " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi)) +
                   " parameters, got " + std::to_string(p.size()));
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidInput && e.message().find("key '") == std::string::npos)
      fail(path, e.message());
    throw;
  }
}

json time_function_json(const TimeFunction& f) {
  if (f.kind() == TimeFunction::Kind::Tabulated)
    return json{{"kind", "tabulated"}, {"s", f.table_s()}, {"values", f.table_values()}};
  return json{{"kind", to_string(f.kind())}, {"params", f.params()}};
}

json coefficient_json(const CoefficientField& f) {
  if (f.kind() == CoefficientField::Kind::Tabulated)
    return json{{"kind", "tabulated"}, {"s", f.table_s()}, {"x", f.table_x()}, {"values", f.table_values()}};
  return json{{"kind", to_string(f.kind())}, {"params", f.params()}};
}

SideSpec side_from_json(const json& j, const std::string& path) {
  require_object(j, path, {"drift", "diffusion", "holder_exponent", "diffusion_bounds"});
  SideSpec s;
  s.drift = coefficient_from_json(member(j, path, "drift"), join(path, "drift"));
  s.diffusion = coefficient_from_json(member(j, path, "diffusion"), join(path, "diffusion"));
  if (j.contains("holder_exponent")) {
    s.holder_exponent = number(j["holder_exponent"], join(path, "holder_exponent"));
    if (!(s.holder_exponent > 0 && s.holder_exponent < 1)) fail(join(path, "holder_exponent"), "must lie in (0,1)");
  }
  if (j.contains("diffusion_bounds")) {
    auto b = numbers(j["diffusion_bounds"], join(path, "diffusion_bounds"));
    if (b.size() != 2 || !(b[0] > 0) || !(b[0] <= b[1])) fail(join(path, "diffusion_bounds"), "expected [b, B] with 0 < b <= B");
    s.lower_bound = b[0];
    s.upper_bound = b[1];
  }
  return s;
}

json side_json(const SideSpec& s) {
  json j{{"drift", coefficient_json(s.drift)}, {"diffusion", coefficient_json(s.diffusion)},
         {"holder_exponent", s.holder_exponent}};
  if (s.lower_bound && s.upper_bound) j["diffusion_bounds"] = {*s.lower_bound, *s.upper_bound};
  return j;
}

}  // namespace

CoefficientField coefficient_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return CoefficientField::constant(number(j, path));
  const std::string kind = kind_of(j, path);
  return wrap(path, [&]() -> CoefficientField {
    if (kind == "tabulated") {
      require_object(j, path, {"kind", "s", "x", "values"});
      auto s = numbers(member(j, path, "s"), join(path, "s"));
      auto x = numbers(member(j, path, "x"), join(path, "x"));
      const json& v = member(j, path, "values");
      if (!v.is_array()) fail(join(path, "values"), "expected an array of rows");
      std::vector<std::vector<double>> rows;
      for (std::size_t k = 0; k < v.size(); ++k) rows.push_back(numbers(v[k], join(path, "values") + "[" + std::to_string(k) + "]"));
      return CoefficientField::tabulated(std::move(s), std::move(x), std::move(rows));
    }
    require_object(j, path, {"kind", "params"});
    auto p = numbers(member(j, path, "params"), join(path, "params"));
    const std::string pp = join(path, "params");
    if (kind == "constant") {
      require_params(p, 1, 1, pp);
      return CoefficientField::constant(p[0]);
    }
    if (kind == "affine-in-x") {
      require_params(p, 4, 4, pp);
      return CoefficientField::affine_in_x(p[0], p[1], p[2], p[3]);
    }
    if (kind == "sinusoidal-in-s-and-x") {
      require_params(p, 4, 5, pp);
      return CoefficientField::sinusoidal(p[0], p[1], p[2], p[3], p.size() > 4 ? p[4] : 0.0);
    }
    fail(join(path, "kind"), "unknown coefficient kind '" + kind + "'");
  });
}

TimeFunction time_function_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return TimeFunction::constant(number(j, path));
  const std::string kind = kind_of(j, path);
  return wrap(path, [&]() -> TimeFunction {
    if (kind == "tabulated") {
      require_object(j, path, {"kind", "s", "values"});
      return TimeFunction::tabulated(numbers(member(j, path, "s"), join(path, "s")),
                                     numbers(member(j, path, "values"), join(path, "values")));
    }
    require_object(j, path, {"kind", "params"});
    auto p = numbers(member(j, path, "params"), join(path, "params"));
    const std::string pp = join(path, "params");
    if (kind == "constant") {
      require_params(p, 1, 1, pp);
      return TimeFunction::constant(p[0]);
    }
    if (kind == "linear") {
      require_params(p, 2, 2, pp);
      return TimeFunction::linear(p[0], p[1]);
    }
    if (kind == "sinusoidal") {
      require_params(p, 3, 4, pp);
      return TimeFunction::sinusoidal(p[0], p[1], p[2], p.size() > 3 ? p[3] : 0.0);
    }
    fail(join(path, "kind"), "unknown kind '" + kind + "'");
  });
}

InitialFunction initial_function_from_json(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return wrap(path, [&]() -> InitialFunction {
    if (kind == "tabulated") {
      require_object(j, path, {"kind", "x", "values", "breaks"});
      std::vector<int> breaks;
      if (j.contains("breaks")) {
        const json& b = j["breaks"];
        if (!b.is_array()) fail(join(path, "breaks"), "expected an array of node indices");
        for (std::size_t k = 0; k < b.size(); ++k) breaks.push_back(integer(b[k], join(path, "breaks") + "[" + std::to_string(k) + "]"));
      }
      return InitialFunction::tabulated(numbers(member(j, path, "x"), join(path, "x")),
                                        numbers(member(j, path, "values"), join(path, "values")), breaks);
    }
    require_object(j, path, {"kind", "params"});
    std::vector<double> p;
    if (j.contains("params")) p = numbers(j["params"], join(path, "params"));
    const std::string pp = join(path, "params");
    if (kind == "constant-one") {
      require_params(p, 0, 1, pp);
      return InitialFunction::constant_one(p.empty() ? 1.0 : p[0]);
    }
    if (kind == "gaussian-bump") {
      require_params(p, 3, 3, pp);
      return InitialFunction::gaussian_bump(p[0], p[1], p[2]);
    }
    if (kind == "indicator-smoothed") {
      require_params(p, 3, 4, pp);
      return InitialFunction::indicator_smoothed(p[0], p[1], p[2], p.size() > 3 ? p[3] : 1.0);
    }
    if (kind == "polynomial-clamped") {
      require_params(p, 3, 64, pp);
      return InitialFunction::polynomial_clamped(p[0], p[1], std::vector<double>(p.begin() + 2, p.end()));
    }
    fail(join(path, "kind"), "unknown initial function kind '" + kind + "'");
  });
}

json initial_function_to_json(const InitialFunction& f) {
  if (f.kind() == InitialFunction::Kind::Tabulated) {
    json j{{"kind", "tabulated"}, {"x", f.table_x()}, {"values", f.table_values()}};
    if (!f.table_breaks().empty()) j["breaks"] = f.table_breaks();
    return j;
  }
  return json{{"kind", to_string(f.kind())}, {"params", f.params()}};
}

Problem problem_from_json(const json& j) {
  require_object(j, "", {"schema_version", "horizon", "left", "right", "membrane", "wentzell", "validation", "tol_mem"});
  if (j.contains("schema_version")) {
    const int v = integer(j["schema_version"], "schema_version");
    if (v != kProblemSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(v));
  }
  Problem p;
  p.horizon = number(member(j, "", "horizon"), "horizon");
  if (!(p.horizon > 0)) fail("horizon", "must be positive");
  p.left = side_from_json(member(j, "", "left"), "left");
  p.right = side_from_json(member(j, "", "right"), "right");
  p.membrane = time_function_from_json(member(j, "", "membrane"), "membrane");
  const json& w = member(j, "", "wentzell");
  require_object(w, "wentzell", {"q1", "q2", "atoms"});
  p.wentzell.q1 = time_function_from_json(member(w, "wentzell", "q1"), "wentzell.q1");
  p.wentzell.q2 = time_function_from_json(member(w, "wentzell", "q2"), "wentzell.q2");
  if (w.contains("atoms")) {
    const json& atoms = w["atoms"];
    if (!atoms.is_array()) fail("wentzell.atoms", "expected an array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string ap = "wentzell.atoms[" + std::to_string(k) + "]";
      require_object(atoms[k], ap, {"position", "weight"});
      Atom a;
      a.position = time_function_from_json(member(atoms[k], ap, "position"), ap + ".position");
      a.weight = time_function_from_json(member(atoms[k], ap, "weight"), ap + ".weight");
      p.wentzell.atoms.push_back(std::move(a));
    }
  }
  if (j.contains("validation")) {
    const json& v = j["validation"];
    require_object(v, "validation", {"grid_resolution", "x_min", "x_max"});
    if (v.contains("grid_resolution")) {
      p.grid.resolution = integer(v["grid_resolution"], "validation.grid_resolution");
      if (p.grid.resolution < 2) fail("validation.grid_resolution", "must be >= 2");
    }
    if (v.contains("x_min")) p.grid.x_min = number(v["x_min"], "validation.x_min");
    if (v.contains("x_max")) p.grid.x_max = number(v["x_max"], "validation.x_max");
    if (!(p.grid.x_min < p.grid.x_max)) fail("validation", "x_min must be below x_max");
  }
  if (j.contains("tol_mem")) {
    p.tol_mem = number(j["tol_mem"], "tol_mem");
    if (!(p.tol_mem >= 0)) fail("tol_mem", "must be nonnegative");
  }
  return p;
}

Problem problem_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
  return problem_from_json(j);
}

json problem_to_json(const Problem& p) {
  json atoms = json::array();
  for (const auto& a : p.wentzell.atoms)
    atoms.push_back({{"position", time_function_json(a.position)}, {"weight", time_function_json(a.weight)}});
  return json{{"schema_version", kProblemSchemaVersion},
              {"horizon", p.horizon},
              {"left", side_json(p.left)},
              {"right", side_json(p.right)},
              {"membrane", time_function_json(p.membrane)},
              {"wentzell", {{"q1", time_function_json(p.wentzell.q1)}, {"q2", time_function_json(p.wentzell.q2)}, {"atoms", atoms}}},
              {"validation", {{"grid_resolution", p.grid.resolution}, {"x_min", p.grid.x_min}, {"x_max", p.grid.x_max}}},
              {"tol_mem", p.tol_mem}};
}

json validation_report_to_json(const ValidationReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions)
    conds.push_back({{"condition", c.condition}, {"description", c.description}, {"statistic", c.statistic},
                     {"threshold", c.threshold}, {"pass", c.pass}});
  return json{{"conditions", conds}, {"b", r.b}, {"B", r.B}, {"q0", r.q0}, {"holder_a", r.holder_a},
              {"holder_b", r.holder_b}, {"holder_h", r.holder_h}, {"max_moment", r.max_moment}, {"pass", r.pass()}};
}

}  // namespace membrane
