#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "membrane/error.hpp"
#include "membrane/parametrix.hpp"

using namespace membrane;

namespace {

Problem with_left(CoefficientField drift, CoefficientField diffusion) {
  Problem p;
  p.left.drift = drift;
  p.left.diffusion = diffusion;
  p.right.diffusion = CoefficientField::constant(1.0);
  p.wentzell.q1 = TimeFunction::constant(0.5);
  p.wentzell.q2 = TimeFunction::constant(0.5);
  return p;
}

double drifted_heat(double a, double s, double x, double t, double y) {
  const double T = t - s;
  const double d = y - x - a * T;
  return std::exp(-d * d / (2 * T)) / std::sqrt(2 * std::numbers::pi * T);
}

Problem variable_b() { return with_left(CoefficientField::constant(0.0), CoefficientField::sinusoidal(1.0, 0.25, 1.0, 0.0)); }

Problem variable_ab() {
  return with_left(CoefficientField::sinusoidal(0.1, 0.2, 1.0, 1.0), CoefficientField::sinusoidal(1.0, 0.25, 1.0, 0.0));
}

}  // namespace

TEST(Parametrix, PrincipalKernelValues) {
  FundamentalSolution g1(with_left(CoefficientField::constant(0.0), CoefficientField::constant(1.0)), 1);
  EXPECT_NEAR(g1.principal(0, 0, 1, 0), 0.3989422804, 1e-10);
  EXPECT_NEAR(g1.principal(0, 0, 1, 1), 0.2419707245, 1e-10);
  FundamentalSolution g2(with_left(CoefficientField::constant(0.0), CoefficientField::constant(2.0)), 1);
  EXPECT_NEAR(g2.principal(0, 0, 1, 0), 0.2820947918, 1e-10);
}

TEST(Parametrix, TimeOrderIsEnforced) {
  FundamentalSolution g(variable_b(), 1);
  EXPECT_THROW(g.principal(1, 0, 1, 0), Error);
  EXPECT_THROW(g.eval(1.2, 0, 1, 0, 1), Error);
  try {
    g.principal(0.5, 0, 0.4, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimeOrder);
  }
}

TEST(Parametrix, ConstantCoefficientsWithoutDriftAreTrivial) {
  FundamentalSolution g(with_left(CoefficientField::constant(0.0), CoefficientField::constant(1.0)), 1);
  EXPECT_TRUE(g.trivial());
  for (double x : {-1.0, 0.0, 0.7}) {
    EXPECT_EQ(g.Q(0.2, x, 1.0, 0.1), 0.0);
    EXPECT_EQ(g.correction(0.2, x, 1.0, 0.1), 0.0);
    EXPECT_EQ(g.eval(0.2, x, 1.0, 0.1), g.principal(0.2, x, 1.0, 0.1));
  }
  EXPECT_EQ(g.eval(0.0, 0.3, 1.0, 0.3, 1), 0.0);
}

TEST(Parametrix, DriftedHeatKernelIsRecovered) {
  FundamentalSolution g(with_left(CoefficientField::constant(1.0), CoefficientField::constant(1.0)), 1);
  double err = 0.0;
  for (double s : {0.0, 0.5, 0.9})
    for (double x : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0})
      err = std::max(err, std::abs(g.eval(s, x, 1.0, 0.0) - drifted_heat(1.0, s, x, 1.0, 0.0)));
  EXPECT_LT(err, 2e-5);
}

TEST(Parametrix, DriftedQMatchesClosedForm) {
  // For a = b = 1 the exact Q is a (y - x - a T) / T times the drifted kernel.
  FundamentalSolution g(with_left(CoefficientField::constant(1.0), CoefficientField::constant(1.0)), 1);
  for (double s : {0.2, 0.6})
    for (double x : {-1.0, -0.3, 0.4}) {
      const double T = 1.0 - s;
      const double exact = (0.0 - x - T) / T * drifted_heat(1.0, s, x, 1.0, 0.0);
      EXPECT_NEAR(g.Q(s, x, 1.0, 0.0), exact, 2e-4 * (1 + std::abs(exact)));
    }
}

TEST(Parametrix, VariableDiffusionConservesMass) {
  FundamentalSolution g(variable_b(), 1);
  const double mass = g.action(0.0, 0.0, 0.5, [](double) { return 1.0; });
  EXPECT_NEAR(mass, 1.0, 1e-5);
}

TEST(Parametrix, DerivativeMatchesFiniteDifferences) {
  FundamentalSolution g(variable_b(), 1);
  const double h = 1e-2, s = 0.0, x = 0.0, t = 1.0, y = 0.3;
  auto f = [&](double xx) { return g.eval(s, xx, t, y); };
  const double fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  const double an = g.eval(s, x, t, y, 1);
  EXPECT_LT(std::abs(an - fd) / std::abs(fd), 1e-4);
}

TEST(Parametrix, PositivityAndCorrectionAudit) {
  FundamentalSolution g(variable_b(), 1);
  auto a = audit_correction(g, 1.0, {-0.5, 0.3}, {-1.0, -0.2, 0.0, 0.4, 1.2}, {0.05, 0.3, 1.0});
  EXPECT_EQ(a.samples, 30);
  EXPECT_GT(a.min_G, 0.0);
  EXPECT_TRUE(std::isfinite(a.C));
  EXPECT_LT(a.C, 1.0);
}

TEST(Parametrix, ConsecutiveDepthsAgreeOnceConverged) {
  FundamentalSolution g(variable_b(), 1);
  auto full = g.terminal(1.0, 0.3);
  const int D = full->depth();
  ASSERT_GE(D, 2);
  TerminalTable shallow(g, 1.0, 0.3, D - 1);
  TerminalTable deep(g, 1.0, 0.3, D);
  double diff = 0.0;
  for (double s : {0.0, 0.5, 0.9})
    for (double x : {-1.0, 0.0, 0.3, 1.0})
      diff = std::max(diff, std::abs(g.correction_with(shallow, s, x) - g.correction_with(deep, s, x)));
  EXPECT_LE(diff, g.settings().tol_Q);
}

TEST(Parametrix, ShallowDepthLimitRaisesConvergenceFailure) {
  ParametrixSettings st;
  st.max_depth = 3;
  FundamentalSolution g(with_left(CoefficientField::constant(1.0), CoefficientField::constant(1.0)), 1, st);
  try {
    g.terminal(1.0, 0.0);
    FAIL() << "expected ConvergenceFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConvergenceFailure);
  }
}

TEST(MomentIdentities, HeatKernelResidualsVanish) {
  FundamentalSolution g(with_left(CoefficientField::constant(0.0), CoefficientField::constant(1.0)), 1);
  auto r = check_moment_identities(g, 0.0, 0.2, 0.5);
  EXPECT_LT(r.r0, 1e-9);
  EXPECT_LT(r.r1, 1e-9);
  EXPECT_LT(r.r2, 1e-9);
  EXPECT_NEAR(r.second, 0.5, 1e-9);
}

TEST(MomentIdentities, DriftedMeanEqualsDriftTimesElapsed) {
  FundamentalSolution g(with_left(CoefficientField::constant(1.0), CoefficientField::constant(1.0)), 1);
  auto r = check_moment_identities(g, 0.0, 0.0, 0.5);
  EXPECT_NEAR(r.mean, 0.5, 1e-5);
  EXPECT_NEAR(r.mass, 1.0, 1e-5);
  EXPECT_LT(r.r1, 1e-5);
  EXPECT_LT(r.r2, 1e-5);
}

TEST(MomentIdentities, VariableCoefficientsConvergeUnderRefinement) {
  FundamentalSolution coarse(variable_ab(), 1);
  FundamentalSolution fine(variable_ab(), 1, coarse.settings().refined());
  auto a = check_moment_identities(coarse, 0.0, 0.0, 0.5);
  auto b = check_moment_identities(fine, 0.0, 0.0, 0.5);
  for (double r : {a.r0, a.r1, a.r2}) EXPECT_LE(r, 1e-3);
  EXPECT_LE(b.r0, std::max(a.r0 / 2, 1e-9));
  EXPECT_LE(b.r1, std::max(a.r1 / 2, 1e-9));
  EXPECT_LE(b.r2, std::max(a.r2 / 2, 1e-9));
}
