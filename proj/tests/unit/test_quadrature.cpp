#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/measure.hpp"
#include "levybsde/quadrature.hpp"

using namespace levybsde;

TEST(Quadrature, PanelIntegratesPolynomialExactly) {
  const auto r = integrate_panel([](double x) { return x * x * x - 2 * x; }, -1.0, 2.0, 1e-12);
  EXPECT_NEAR(r.value, (16.0 / 4 - 4.0) - (0.25 - 1.0), 1e-13);
}

TEST(Quadrature, InwardHandlesIntegrableSingularity) {
  const auto r = integrate_inward([](double x) { return 1.0 / std::sqrt(x); }, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Quadrature, InwardFlagsLogDivergence) {
  const auto r = integrate_inward([](double x) { return 1.0 / x; }, 1.0);
  EXPECT_FALSE(r.converged);
}

TEST(Quadrature, OutwardExponentialTail) {
  const auto r = integrate_outward([](double x) { return std::exp(-x); }, 0.0, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Quadrature, OutwardFlagsDivergence) {
  const auto r = integrate_outward([](double x) { return 1.0 / (1.0 + x); }, 0.0, 1.0);
  EXPECT_FALSE(r.converged);
}

TEST(Quadrature, GaussLegendreWeightsSumToTwo) {
  for (int order : {5, 10, 20}) {
    const auto& gl = gauss_legendre(order);
    double s = 0.0;
    for (double w : gl.weights) s += w;
    EXPECT_NEAR(s, 2.0, 1e-14);
  }
}

TEST(Quadrature, LineIntegralAcrossZero) {
  const auto r = integrate_line([](double x) { return std::exp(-std::abs(x)); }, -INFINITY, INFINITY);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
}
