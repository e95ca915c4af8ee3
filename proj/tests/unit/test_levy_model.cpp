#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/levy_model.hpp"

using namespace levybsde;

TEST(Meixner, DensityMatchesDirectEvaluation) {
  // 3 / (0.5 sinh(pi / 4))
  const double expected = 3.0 / (0.5 * std::sinh(std::numbers::pi / 4.0));
  EXPECT_NEAR(meixner_levy_density(0.5, MeixnerParams{2.0, 0.0, 3.0, 0.0}), expected, 1e-12);
  EXPECT_NEAR(expected, 6.9071, 1e-4);
  EXPECT_THROW(meixner_levy_density(0.0, MeixnerParams{}), DomainError);
}

TEST(Meixner, ParameterValidation) {
  EXPECT_THROW(LevyModel::meixner(MeixnerParams{-1.0, 0.0, 1.0, 0.0}), std::exception);
  EXPECT_THROW(LevyModel::meixner(MeixnerParams{1.0, 4.0, 1.0, 0.0}), std::exception);
}

TEST(Meixner, SecondMomentIsSecondCumulant) {
  for (const MeixnerParams p : {MeixnerParams{1.0, 0.0, 1.0, 0.0}, MeixnerParams{0.5, 0.4, 2.0, 0.0}}) {
    const auto m = LevyModel::meixner(p);
    EXPECT_NEAR(moment(m, MultiIndex{2}), meixner_second_cumulant(p), 1e-8);
    EXPECT_NEAR(meixner_second_cumulant(p), p.alpha * p.alpha * p.delta / (1 + std::cos(p.beta)), 1e-14);
  }
}

TEST(Meixner, OddMomentsVanishWhenSymmetric) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  EXPECT_NEAR(moment(m, MultiIndex{3}), 0.0, 1e-10);
  EXPECT_NEAR(moment(m, MultiIndex{5}), 0.0, 1e-10);
}

TEST(CommonPoisson, IntensityFromCopula) {
  EXPECT_EQ(common_poisson_intensity(1, 1, ClaytonCopulaParams{1, 1}), 0.25);
  EXPECT_NEAR(common_poisson_intensity(2, 1, ClaytonCopulaParams{1, 1}), 4.0 / 27.0, 1e-15);
  EXPECT_EQ(common_poisson_intensity(1, 1, ClaytonCopulaParams{1, 0}), 0.0);
}

TEST(CommonPoisson, MomentsAllEqualIntensity) {
  const auto m = common_poisson_measure(1, 1, ClaytonCopulaParams{1, 1});
  for (const auto& p : graded_lex_enumerate(2, 4)) EXPECT_DOUBLE_EQ(moment(m, p), 0.25);
}

TEST(CommonPoisson, CompensatorMean) {
  // The atom at (1,1) has norm sqrt(2) >= 1, so a~ = -lambda + c.
  const auto m = common_poisson_measure(1, 1, ClaytonCopulaParams{1, 1});
  const Vector a = compensator_mean(m);
  EXPECT_DOUBLE_EQ(a[0], -0.75);
  EXPECT_DOUBLE_EQ(a[1], -0.75);
}

TEST(CommonPoisson, MarginsFixtureHasPoissonMarginals) {
  const auto m = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  double mass1 = 0.0, mass2 = 0.0;
  for (const auto& a : m.atoms()) {
    if (a.x[0] == 1.0) mass1 += a.intensity;
    if (a.x[1] == 1.0) mass2 += a.intensity;
  }
  EXPECT_DOUBLE_EQ(mass1, 1.0);
  EXPECT_DOUBLE_EQ(mass2, 1.0);
}

TEST(Clayton, CopulaBasicProperties) {
  const ClaytonCopulaParams c{1.0, 1.0};
  const double zero[2] = {0.0, 3.0};
  EXPECT_EQ(clayton_copula(zero, c), 0.0);
  // Positive quadrant with eta = 1: (1/u1 + 1/u2)^-1.
  const double u[2] = {2.0, 3.0};
  EXPECT_NEAR(clayton_copula(u, c), 1.0 / (0.5 + 1.0 / 3.0), 1e-14);
  // Margins: F(u, inf) = u for u > 0 under eta = 1.
  const double big[2] = {2.0, 1e12};
  EXPECT_NEAR(clayton_copula(big, c), 2.0, 1e-9);
}

TEST(Clayton, ConditionalInverseIsMonotone) {
  const ClaytonCopulaParams c{1.5, 0.7};
  double prev = -INFINITY;
  for (double v = 0.05; v < 1.0; v += 0.1) {
    const double u2 = clayton_conditional_inverse(v, 1.3, c);
    EXPECT_GT(u2, prev);
    prev = u2;
  }
}

TEST(ExponentialMoments, MeixnerTailCondition) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  // Tails decay like exp(-pi |x|); lambda = 1 is fine, lambda = 4 is not.
  EXPECT_TRUE(check_hypothesis1(m, 0.1, 1.0).holds);
  EXPECT_FALSE(check_hypothesis1(m, 0.1, 4.0).holds);
}

TEST(Martingale, PoissonResidualIsLambdaTimesEMinusTwo) {
  Vector a(1);
  a << 0.0;
  const auto m = LevyModel::atomic(a, {Atom{Vector::Ones(1), 1.5}});
  // e^1 - 1 - 1 per unit jump.
  EXPECT_NEAR(exponential_compensator(m)[0], 1.5 * (std::exp(1.0) - 2.0), 1e-14);
  EXPECT_NEAR(risk_neutral_drift(m)[0], -1.5 * (std::exp(1.0) - 2.0), 1e-14);
}

TEST(LevyModel, PureDriftHasNoJumps) {
  const auto m = LevyModel::pure_drift(Vector::Zero(2));
  EXPECT_FALSE(m.has_jumps());
  EXPECT_EQ(moment(m, MultiIndex{2, 0}), 0.0);
}

TEST(LevyModel, FiniteVariation) {
  EXPECT_TRUE(has_finite_variation(common_poisson_measure(1, 1, ClaytonCopulaParams{1, 1})));
  EXPECT_FALSE(has_finite_variation(LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0})));
}
