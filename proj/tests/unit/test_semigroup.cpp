#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "membrane/error.hpp"
#include "membrane/quadrature.hpp"
#include "membrane/semigroup.hpp"

using namespace membrane;

namespace {

const double kPi = std::numbers::pi;

Problem constant_case(double b1, double b2, double q1, double q2) {
  Problem p;
  p.left.diffusion = CoefficientField::constant(b1);
  p.right.diffusion = CoefficientField::constant(b2);
  p.wentzell.q1 = TimeFunction::constant(q1);
  p.wentzell.q2 = TimeFunction::constant(q2);
  return p;
}

Atom atom(double y, double w) { return Atom{TimeFunction::constant(y), TimeFunction::constant(w)}; }

double gauss(double z, double var) { return std::exp(-z * z / (2 * var)) / std::sqrt(2 * kPi * var); }

// heat semigroup with diffusion b applied to amplitude * exp(-(y-c)^2 / (2 w^2))
double heat_bump(double amplitude, double c, double w, double b, double dt, double x) {
  const double v = w * w + b * dt;
  return amplitude * w / std::sqrt(v) * std::exp(-(x - c) * (x - c) / (2 * v));
}

double skew(double alpha, double dt, double x, double y) {
  if (x >= 0) return y > 0 ? gauss(y - x, dt) + (2 * alpha - 1) * gauss(y + x, dt) : 2 * (1 - alpha) * gauss(y - x, dt);
  return y > 0 ? 2 * alpha * gauss(y - x, dt) : gauss(y - x, dt) - (2 * alpha - 1) * gauss(y + x, dt);
}

double skew_action(double alpha, double dt, double x, const InitialFunction& phi) {
  const QuadratureRule& gl = gauss_legendre(32);
  double acc = 0;
  for (int p = 0; p < 80; ++p) {
    const double a = -10 + 0.25 * p, b = a + 0.25;
    acc += integrate(gl, a, b, [&](double y) { return skew(alpha, dt, x, y) * phi(y); });
  }
  return acc;
}

}  // namespace

TEST(Effective, WeightsAndDiffusion) {
  const Problem p = constant_case(1, 4, 0.5, 0.5);
  const EffectiveCoefficients c(p);
  EXPECT_NEAR(c.l(1, 0.3), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.l(2, 0.3), 1.0 / 3.0, 1e-15);
  const EffectiveValues v = effective_coefficients(p, 0.3, 0.0);
  EXPECT_NEAR(v.b, 2.0, 1e-14);
  EXPECT_EQ(v.a0, 0.0);
  EXPECT_EQ(effective_coefficients(p, 0.3, -1.0).b, 1.0);
  EXPECT_EQ(effective_coefficients(p, 0.3, 1.0).b, 4.0);
}

TEST(Effective, WeightsSumToOne) {
  Problem p = constant_case(1, 3, 0.2, 0.7);
  p.left.diffusion = CoefficientField::sinusoidal(1.5, 0.4, 2.0, 1.0);
  p.wentzell.q1 = TimeFunction::sinusoidal(0.5, 0.3, 3.0);
  p.membrane = TimeFunction::sinusoidal(0, 0.1, 2.0);
  const EffectiveCoefficients c(p);
  for (double s = 0; s <= 1; s += 0.125) EXPECT_NEAR(c.l(1, s) + c.l(2, s), 1.0, 1e-15);
}

TEST(Effective, MembraneDrift) {
  const Problem p = constant_case(1, 1, 0, 1);
  EXPECT_NEAR(effective_coefficients(p, 0.2, 0.0).a0, 1.0, 1e-15);
  const Problem skewed = constant_case(1, 1, 0.25, 0.75);
  EXPECT_NEAR(effective_coefficients(skewed, 0.2, 0.0).a0, 0.5, 1e-15);
}

TEST(Effective, MeasureNotNull) {
  Problem p = constant_case(1, 1, 0.5, 0.5);
  p.wentzell.atoms.push_back(atom(0.5, 1.0));
  try {
    effective_coefficients(p, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeasureNotNull);
  }
  SemigroupOperator op(p);
  try {
    op.transition_moments(0.0, 1.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeasureNotNull);
  }
}

TEST(Apply, IdentityAtEqualTimes) {
  SemigroupOperator op(constant_case(1, 2, 0.3, 0.6));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.2, 0.5);
  for (double x : {-1.0, 0.0, 0.7}) EXPECT_EQ(op.value(0.4, x, 0.4, phi), phi(x));
  EXPECT_EQ(op.memo_size(), 0u);
}

TEST(Apply, ConservesConstants) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  EXPECT_LE(op.check_conservation(0.0, 1.0), 1e-3);
  Problem moving = constant_case(1, 2, 0.4, 0.6);
  moving.membrane = TimeFunction::sinusoidal(0, 0.1, 2.0);
  SemigroupOperator mv(moving);
  EXPECT_LE(mv.check_conservation(0.0, 1.0), 1e-3);
}

TEST(Apply, SymmetricCaseIsHeatSemigroup) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  const std::vector<double> xs = op.audit_grid();
  const std::vector<double> v = op.apply(0.0, 1.0, phi, xs);
  double err = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) err = std::max(err, std::abs(v[k] - heat_bump(1.0, 0.3, 0.5, 1.0, 1.0, xs[k])));
  EXPECT_LE(err, 1e-3);
  EXPECT_EQ(op.memo_size(), 1u);
}

TEST(Apply, SkewCaseMatchesSkewBrownianMotion) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::indicator_smoothed(-0.5, 1.5, 0.2);
  const std::vector<double> xs = op.audit_grid();
  const std::vector<double> v = op.apply(0.0, 1.0, phi, xs);
  double err = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) err = std::max(err, std::abs(v[k] - skew_action(0.75, 1.0, xs[k], phi)));
  EXPECT_LE(err, 1e-2);
}

TEST(Apply, OnMembraneUsesLeftTrace) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  EXPECT_EQ(op.value(0.2, 0.0, 1.0, phi), op.side_value(1, 0.2, 0.0, 1.0, phi));
  EXPECT_NEAR(op.side_value(1, 0.2, 0.0, 1.0, phi), op.side_value(2, 0.2, 0.0, 1.0, phi), 1e-3);
}

TEST(Apply, RejectsReversedTimes) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  EXPECT_THROW(op.value(0.5, 0.0, 0.2, InitialFunction::constant_one()), Error);
}

TEST(ChapmanKolmogorov, TrivialSplits) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  EXPECT_LE(op.check_chapman_kolmogorov(0.0, 1.0, 1.0, phi).discrepancy, 1e-6);
  const ChapmanKolmogorov at_s = op.check_chapman_kolmogorov(0.0, 0.0, 1.0, phi);
  EXPECT_LE(at_s.discrepancy, 1e-6);
  EXPECT_GT(at_s.retab_nodes, 1000);
}

TEST(ChapmanKolmogorov, HeatCase) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  EXPECT_LE(op.check_chapman_kolmogorov(0.0, 0.5, 1.0, phi).discrepancy, 2e-3);
}

TEST(ChapmanKolmogorov, SkewMovingMembrane) {
  Problem p = constant_case(1, 1, 0.25, 0.75);
  p.membrane = TimeFunction::sinusoidal(0, 0.1, 2.0);
  SemigroupOperator op(p);
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  EXPECT_LE(op.check_chapman_kolmogorov(0.0, 0.5, 1.0, phi).discrepancy, 5e-3);
}

TEST(PositivityContraction, GaussianBump) {
  SemigroupOperator op(constant_case(1, 2, 0.25, 0.75));
  const PositivityContraction r = op.check_positivity_contraction(0.0, 1.0, InitialFunction::gaussian_bump(1.0, 0.3, 0.5));
  EXPECT_GE(r.min_value, -1e-4);
  EXPECT_LE(r.sup_norm, 1.0 + 1e-3);
}

TEST(PositivityContraction, ScaledFunction) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const PositivityContraction one = op.check_positivity_contraction(0.0, 1.0, InitialFunction::constant_one());
  EXPECT_NEAR(one.sup_norm, 1.0, 1e-3);
  const PositivityContraction two = op.check_positivity_contraction(0.0, 1.0, InitialFunction::indicator_smoothed(-0.5, 1.0, 0.1, 2.0));
  EXPECT_NEAR(two.phi_norm, 2.0, 1e-3);
  EXPECT_LE(two.sup_norm, 2.002);
  EXPECT_GE(two.min_value, -2e-4);
}

TEST(Continuity, TabulatedSequenceConverges) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction limit = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  std::vector<InitialFunction> seq;
  for (int n : {8, 16, 32, 64}) {
    std::vector<double> x, v;
    for (int k = 0; k <= 10 * n; ++k) {
      x.push_back(-5.0 + k / static_cast<double>(n));
      v.push_back(limit(x.back()));
    }
    seq.push_back(InitialFunction::tabulated(x, v));
  }
  const std::vector<double> d = op.check_continuity(0.0, 1.0, seq, limit);
  ASSERT_EQ(d.size(), 4u);
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d[k], d[k - 1]);
  EXPECT_LE(d.back(), 1e-5);
}

TEST(Conjugation, SymmetricCaseIsExact) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  const Conjugation r = op.check_conjugation(0.0, 1.0, InitialFunction::gaussian_bump(1.0, 0.3, 0.5));
  EXPECT_LE(r.b1, 1e-6);
  EXPECT_LE(r.b2, 1e-6);
  EXPECT_FALSE(r.s.empty());
}

TEST(Conjugation, SkewCase) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  const Conjugation r = op.check_conjugation(0.0, 1.0, phi);
  EXPECT_LE(r.b1, 1e-3 * phi.sup_norm());
  EXPECT_LE(r.b2, 1e-3 * phi.sup_norm());
}

TEST(Conjugation, SingleAtom) {
  Problem p = constant_case(1, 1, 0.5, 0.5);
  p.wentzell.atoms.push_back(atom(0.5, 1.0));
  SemigroupOperator op(p);
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.5);
  const Conjugation r = op.check_conjugation(0.0, 1.0, phi);
  EXPECT_LE(r.b2, 5e-3 * phi.sup_norm());
  EXPECT_LE(r.b1, 5e-3 * phi.sup_norm());
}

TEST(WeakGenerator, NoBoundaryTermForEqualWeights) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  const WeakGenerator r = op.weak_generator_pairing(0.0, InitialFunction::gaussian_bump(1.0, 0.3, 0.7),
                                                    TestFunction::bump(0.0, 1.5), {});
  EXPECT_EQ(r.boundary, 0.0);
  EXPECT_EQ(r.rhs, r.bulk);
}

TEST(WeakGenerator, BoundaryTermForOneSidedWeights) {
  SemigroupOperator op(constant_case(1, 1, 0.0, 1.0));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.7);
  const TestFunction f = TestFunction::bump(0.1, 1.5);
  const WeakGenerator r = op.weak_generator_pairing(0.0, phi, f, {});
  EXPECT_NEAR(r.boundary, phi.derivative(0.0, 1) * f.f(0.0), 1e-14);
}

TEST(WeakGenerator, SkewCaseConvergesMonotonically) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const WeakGenerator r = op.weak_generator_pairing(0.0, InitialFunction::gaussian_bump(1.0, 0.3, 0.7),
                                                    TestFunction::bump(0.0, 1.5), {0.04, 0.02, 0.01});
  ASSERT_EQ(r.lhs.size(), 3u);
  EXPECT_NE(r.boundary, 0.0);
  const double e0 = std::abs(r.lhs[0] - r.rhs), e1 = std::abs(r.lhs[1] - r.rhs), e2 = std::abs(r.lhs[2] - r.rhs);
  EXPECT_LT(e1, e0);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 0.1 * std::abs(r.rhs));
}

TEST(GeneratorDomain, SymmetricEvenFunction) {
  SemigroupOperator op(constant_case(1, 1, 0.5, 0.5));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.0, 0.7);
  const DomainCheck r = op.generator_domain_check(0.0, phi, {0.02, 0.01, 0.005}, {-1.0, -0.5, 0.0, 0.5, 1.0});
  EXPECT_LE(r.residual_1, 1e-12);
  EXPECT_LE(r.residual_2, 1e-12);
  ASSERT_TRUE(r.in_domain);
  ASSERT_EQ(r.sup_error.size(), 3u);
  EXPECT_LT(r.sup_error[2], r.sup_error[0]);
  EXPECT_LE(r.sup_error[2], 1e-2);
}

TEST(GeneratorDomain, ViolatingFunctionSkipsLimit) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.3, 0.7);
  const DomainCheck r = op.generator_domain_check(0.0, phi, {0.01});
  EXPECT_FALSE(r.in_domain);
  EXPECT_GT(r.residual_2, 1e-3);
  EXPECT_TRUE(r.sup_error.empty());
  EXPECT_EQ(op.memo_size(), 0u);
}

TEST(GeneratorDomain, SkewWeightsOnDomainFunction) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const InitialFunction phi = InitialFunction::gaussian_bump(1.0, 0.0, 0.7);
  const DomainCheck r = op.generator_domain_check(0.0, phi, {0.004, 0.002, 0.001}, {-0.5, 0.5});
  ASSERT_TRUE(r.in_domain);
  for (std::size_t k = 0; k < r.x.size(); ++k)
    EXPECT_NEAR(r.quotient.back()[k], generator_L(op.problem(), 0.0, r.x[k], phi), 5e-3) << r.x[k];
}

TEST(Moments, GaussianFarFromMembrane) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const double dt = 0.01;
  const Moments m = op.transition_moments(0.0, 2.0, dt);
  EXPECT_NEAR(m.mean, 0.0, 1e-5);
  EXPECT_NEAR(m.second, dt, 1e-5);
  EXPECT_NEAR(m.fourth, 3 * dt * dt, 1e-6);
}

TEST(Moments, FourthMomentVanishesFasterThanDt) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  double prev = 1e9;
  for (double dt : {0.04, 0.02, 0.01}) {
    const double r = op.transition_moments(0.0, 0.05, dt).fourth / dt;
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Moments, SkewMeanLimitSeesMembraneDrift) {
  SemigroupOperator op(constant_case(1, 1, 0.25, 0.75));
  const MomentLimits r = op.moment_limits(0.0, 0.01, TestFunction::bump(0.0, 1.0));
  EXPECT_NEAR(r.drift_target, 0.5, 1e-15);
  EXPECT_NEAR(r.mean_pairing, r.drift_target, 0.1 * r.drift_target);
  EXPECT_NEAR(r.second_pairing, r.diffusion_target, 0.1 * r.diffusion_target);
}

TEST(Apply, VariableDiffusionConservesConstants) {
  Problem p = constant_case(1, 2, 0.4, 0.6);
  p.left.diffusion = CoefficientField::sinusoidal(1.2, 0.3, 1.5, 2.0);
  p.membrane = TimeFunction::sinusoidal(0, 0.1, 2.0);
  SemigroupOperator op(p);
  EXPECT_LE(op.check_conservation(0.0, 1.0), 1e-3);
}
