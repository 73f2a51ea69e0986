#include <gtest/gtest.h>

#include <cmath>

#include "membrane/error.hpp"
#include "membrane/problem.hpp"
#include "membrane/problem_json.hpp"

using namespace membrane;

namespace {

Problem unit_problem() {
  Problem p;
  p.left.diffusion = CoefficientField::constant(1.0);
  p.right.diffusion = CoefficientField::constant(1.0);
  p.wentzell.q1 = TimeFunction::constant(0.5);
  p.wentzell.q2 = TimeFunction::constant(0.5);
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST(Problem, ConstantInstancePassesAllConditions) {
  auto r = validate(unit_problem(), 32);
  ASSERT_EQ(r.conditions.size(), 5u);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.b, 1.0);
  EXPECT_EQ(r.B, 1.0);
  EXPECT_EQ(r.q0, 1.0);
}

TEST(Problem, SinusoidalDiffusionWithinDeclaredBounds) {
  Problem p = unit_problem();
  p.left.diffusion = CoefficientField::sinusoidal(1.0, 0.5, 1.0, 0.0);
  p.left.lower_bound = 0.5;
  p.left.upper_bound = 1.5;
  auto r = validate(p, 64);
  EXPECT_TRUE(r.pass());
  // sampled extremum of 1 + 0.5 sin x over x in [-5,5] on 65 nodes
  double m = 10;
  for (int k = 0; k <= 64; ++k) m = std::min(m, 1.0 + 0.5 * std::sin(-5.0 + 10.0 * k / 64));
  EXPECT_DOUBLE_EQ(r.conditions[0].statistic, m);
  EXPECT_GE(r.conditions[0].statistic, 0.5);
}

TEST(Problem, DeclaredBoundViolationFailsConditionOne) {
  Problem p = unit_problem();
  p.left.diffusion = CoefficientField::sinusoidal(1.0, 0.5, 1.0, 0.0);
  p.left.lower_bound = 0.8;
  p.left.upper_bound = 1.5;
  auto r = validate(p, 64);
  EXPECT_FALSE(r.conditions[0].pass);
}

TEST(Problem, HardFailures) {
  Problem p = unit_problem();
  p.wentzell.q1 = TimeFunction::constant(0.0);
  p.wentzell.q2 = TimeFunction::constant(0.0);
  EXPECT_EQ(code_of([&] { validate(p, 16); }), ErrorCode::DegenerateWentzell);

  Problem n = unit_problem();
  n.right.diffusion = CoefficientField::sinusoidal(0.2, 0.5, 1.0, 0.0);
  EXPECT_EQ(code_of([&] { validate(n, 16); }), ErrorCode::NonparabolicCoefficient);

  Problem a = unit_problem();
  a.membrane = TimeFunction::linear(0.0, 1.0);
  a.wentzell.atoms.push_back({TimeFunction::constant(0.5), TimeFunction::constant(1.0)});
  EXPECT_EQ(code_of([&] { validate(a, 16); }), ErrorCode::AtomOnMembrane);
}

TEST(Problem, ValidateIsDeterministic) {
  Problem p = unit_problem();
  p.membrane = TimeFunction::sinusoidal(0.0, 0.1, 2.0);
  auto a = validate(p, 40), b = validate(p, 40);
  ASSERT_EQ(a.conditions.size(), b.conditions.size());
  for (std::size_t k = 0; k < a.conditions.size(); ++k) {
    EXPECT_EQ(a.conditions[k].statistic, b.conditions[k].statistic);
    EXPECT_EQ(a.conditions[k].pass, b.conditions[k].pass);
  }
}

TEST(Problem, SideOfClassification) {
  Problem p = unit_problem();
  EXPECT_EQ(side_of(p, 0.0, -1.0), Side::Left);
  EXPECT_EQ(side_of(p, 0.0, 1e-15), Side::Membrane);
  EXPECT_EQ(side_of(p, 0.0, 1e-9), Side::Right);
  Problem m = unit_problem();
  m.membrane = TimeFunction::linear(0.0, 1.0);
  EXPECT_EQ(side_of(m, 0.5, 0.5), Side::Membrane);
}

TEST(Problem, SideOfPartitionsTheLine) {
  Problem p = unit_problem();
  p.membrane = TimeFunction::sinusoidal(0.3, 0.1, 2.0);
  for (double s : {0.0, 0.4, 1.0}) {
    const double h = p.h(s), tol = p.membrane_tolerance(s);
    EXPECT_EQ(side_of(p, s, h - 2 * tol), Side::Left);
    EXPECT_EQ(side_of(p, s, h - 0.5 * tol), Side::Membrane);
    EXPECT_EQ(side_of(p, s, h + 0.5 * tol), Side::Membrane);
    EXPECT_EQ(side_of(p, s, h + 2 * tol), Side::Right);
  }
}

TEST(Problem, WeightsAndDensityFactors) {
  Problem p = unit_problem();
  p.right.diffusion = CoefficientField::constant(4.0);
  EXPECT_NEAR(p.d(1, 0.3), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.d(2, 0.3), 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.l(1, 0.3), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.l(2, 0.3), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(p.l(1, 0.3) + p.l(2, 0.3), 1.0);
}

TEST(Problem, AtomDeltaIsHalfMinimalDistance) {
  Problem p = unit_problem();
  p.membrane = TimeFunction::linear(0.0, 0.5);
  p.wentzell.atoms.push_back({TimeFunction::constant(2.0), TimeFunction::constant(1.0)});
  // distance 2 - 0.5 s is smallest at s = 1
  EXPECT_NEAR(p.atom_delta(), 0.75, 1e-12);
}

TEST(ProblemJson, RoundTrip) {
  const char* text = R"({
    "schema_version": 1, "horizon": 1.0,
    "left":  {"drift": {"kind": "constant", "params": [0]}, "diffusion": {"kind": "sinusoidal-in-s-and-x", "params": [1, 0.25, 1, 0]}, "holder_exponent": 0.5},
    "right": {"drift": {"kind": "affine-in-x", "params": [0, 0.1, -3, 3]}, "diffusion": {"kind": "constant", "params": [2]}, "diffusion_bounds": [1, 3]},
    "membrane": {"kind": "sinusoidal", "params": [0, 0.1, 2, 0]},
    "wentzell": {"q1": 0.25, "q2": {"kind": "constant", "params": [0.75]},
                 "atoms": [{"position": {"kind": "linear", "params": [1, 0.1]}, "weight": 1}]},
    "validation": {"grid_resolution": 32, "x_min": -4, "x_max": 4}
  })";
  Problem p = problem_from_json_text(text);
  EXPECT_EQ(p.grid.resolution, 32);
  EXPECT_DOUBLE_EQ(p.b(1, 0.0, 0.5), 1.0 + 0.25 * std::sin(0.5));
  EXPECT_DOUBLE_EQ(p.a(2, 0.0, 10.0), 0.3);
  EXPECT_DOUBLE_EQ(p.h(0.5), 0.1 * std::sin(1.0));
  ASSERT_EQ(p.wentzell.atoms.size(), 1u);
  EXPECT_DOUBLE_EQ(p.wentzell.atoms[0].position(0.5), 1.05);
  Problem q = problem_from_json(problem_to_json(p));
  EXPECT_EQ(problem_to_json(p).dump(), problem_to_json(q).dump());
}

TEST(ProblemJson, DiagnosticsNameTheOffendingKey) {
  auto message = [](const std::string& text) {
    try {
      problem_from_json_text(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string base_left = R"("left": {"drift": 0, "diffusion": 1})";
  EXPECT_NE(message("{\"horizon\": 1, " + base_left + "}").find("right"), std::string::npos);
  EXPECT_NE(message(R"({"horizon": 1, "left": {"drift": 0, "diffusion": {"kind": "constant", "params": [1, 2]}}})")
                .find("left.diffusion.params"),
            std::string::npos);
  EXPECT_NE(message(R"({"horizon": "x"})").find("horizon"), std::string::npos);
  EXPECT_NE(message(R"({"horizon": 1, "bogus": 2})").find("bogus"), std::string::npos);
  EXPECT_NE(message("{ not json").find("malformed JSON"), std::string::npos);
}

TEST(InitialFunctions, CatalogValuesAndNorms) {
  auto g = InitialFunction::gaussian_bump(2.0, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(g(0.5), 2.0);
  EXPECT_DOUBLE_EQ(g.sup_norm(), 2.0);
  EXPECT_NEAR(g.derivative(0.75, 1), -2.0 * 4.0 * std::exp(-0.5), 1e-14);
  auto one = InitialFunction::constant_one();
  EXPECT_EQ(one(123.0), 1.0);
  auto ind = InitialFunction::indicator_smoothed(-1, 1, 0.1);
  EXPECT_NEAR(ind(0.0), std::tanh(10.0), 1e-15);
  auto poly = InitialFunction::polynomial_clamped(-1, 1, {0, 0, 1});
  EXPECT_DOUBLE_EQ(poly(3.0), 1.0);
  EXPECT_DOUBLE_EQ(poly.derivative(0.5, 2), 2.0);
  EXPECT_NEAR(poly.sup_norm(), 1.0, 1e-12);
}

TEST(InitialFunctions, TabulatedCubicReproducesCubicsAndRespectsBreaks) {
  std::vector<double> x, v;
  for (int k = 0; k <= 20; ++k) {
    x.push_back(-1.0 + 0.1 * k);
    v.push_back(std::pow(x.back(), 3) - x.back());
  }
  auto f = InitialFunction::tabulated(x, v);
  EXPECT_NEAR(f(0.333), std::pow(0.333, 3) - 0.333, 1e-13);
  EXPECT_NEAR(f.derivative(0.333, 1), 3 * 0.333 * 0.333 - 1, 1e-12);
  // kink at node 10 (x=0): |x|
  std::vector<double> a;
  for (double xx : x) a.push_back(std::abs(xx));
  auto k = InitialFunction::tabulated(x, a, {10});
  EXPECT_NEAR(k(0.05), 0.05, 1e-14);
  EXPECT_NEAR(k(-0.05), 0.05, 1e-14);
  EXPECT_EQ(k(5.0), 1.0);
  EXPECT_NE(f.id(), k.id());
}
