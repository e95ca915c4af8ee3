#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/pdie.hpp"

using namespace levybsde;

namespace {

PdieGrid line_grid(double lo, double hi, int nodes, int steps) {
  return PdieGrid{SpaceGrid({Axis{lo, hi, nodes}}), TimeGrid(1.0, steps)};
}

double at(const GridSolution& s, double t, double x) { return s.value(0, t, std::span<const double>(&x, 1)); }

}  // namespace

TEST(Pdie, ConstantTerminalIsPreserved) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.2, 1.0, 0.0});
  const auto sol = solve_linear_pdie(m, {[](std::span<const double>) { return 2.5; }},
                                     line_grid(-6, 6, 241, 200));
  for (double v : sol.slice(0, 0)) EXPECT_NEAR(v, 2.5, 1e-12);
}

TEST(Pdie, AffineTerminalMovesWithMean) {
  // theta(t, x) = x + a~ (T - t)
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.4, 1.0, 0.0}, 0.2);
  const double abar = compensator_mean(m)[0];
  const auto sol = solve_linear_pdie(m, {[](std::span<const double> x) { return x[0]; }},
                                     line_grid(-6, 6, 241, 200));
  for (double x : {-1.0, 0.0, 0.7}) EXPECT_NEAR(at(sol, 0.0, x), x + abar, 2e-3);
}

TEST(Pdie, CompensatedPoissonMatchesSeries) {
  // X(T) = N(T) - T with N Poisson(1); theta(0, 0) = sum_n e^-1 / n! g(n - 1).
  const auto m = LevyModel::atomic(Vector::Constant(1, -1.0), {Atom{Vector::Ones(1), 1.0}});
  auto g = [](double x) { return std::exp(-0.5 * x * x); };
  double oracle = 0.0, w = std::exp(-1.0);
  for (int n = 0; n < 40; ++n) {
    oracle += w * g(n - 1.0);
    w /= (n + 1);
  }
  const auto sol = solve_linear_pdie(m, {[&](std::span<const double> x) { return g(x[0]); }},
                                     line_grid(-4, 12, 801, 800));
  EXPECT_NEAR(at(sol, 0.0, 0.0), oracle, 2e-3);
}

TEST(Pdie, ZeroDriverMatchesLinearExactly) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  auto g = [](std::span<const double> x) { return std::tanh(x[0]); };
  const auto grid = line_grid(-6, 6, 121, 150);
  const auto a = solve_linear_pdie(m, {g}, grid);
  const auto b = solve_nonlinear_pdie(m, {g}, zero_driver(), nullptr, grid);
  auto sa = a.slice(0, 0);
  auto sb = b.slice(0, 0);
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(sa[i], sb[i]);
}

TEST(Pdie, ExplicitStepLimitIsReported) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  try {
    solve_linear_pdie(m, {[](std::span<const double>) { return 1.0; }}, line_grid(-8, 8, 1601, 1));
    FAIL() << "expected StepSizeError";
  } catch (const StepSizeError& e) {
    EXPECT_GT(e.suggested_steps(), 1);
  }
}

TEST(Pdie, StencilRowsConserveMass) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.3, 1.0, 0.0});
  const SpaceGrid grid({Axis{-6, 6, 241}});
  const auto st = build_stencil(m, grid, 2);
  // Second moment of the measure: lumped entries plus the central cell.
  double m2 = st.small_cov(0, 0);
  for (std::size_t j = 0; j < st.size(); ++j) m2 += st.weight[j] * st.y[j] * st.y[j];
  EXPECT_NEAR(m2, moment(m, MultiIndex{2}), 1e-6);
  EXPECT_LE(max_stable_step(st), 1.0 / (2 * st.total_rate) * (1 + 1e-12));
}

TEST(Pdie, LinearDriverScalesSolution) {
  // f = r y with constant terminal: theta(0) = e^{rT} up to O(dt).
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  const auto sol = solve_nonlinear_pdie(m, {[](std::span<const double>) { return 1.0; }}, linear_driver(0.3),
                                        nullptr, line_grid(-6, 6, 121, 400));
  EXPECT_NEAR(at(sol, 0.0, 0.0), std::exp(0.3), 2e-3);
}

TEST(Pdie, ClarkOconeDegreeOneOfAffinePayoff) {
  // theta = x + const, so z^(1) = d theta / dx * ||H^(1)|| in orthonormal units.
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  const OrthoBasis basis(m, 2);
  const auto sol = solve_linear_pdie(m, {[](std::span<const double> x) { return 2.0 * x[0]; }},
                                     line_grid(-6, 6, 241, 200));
  const double x = 0.1;
  const auto tab = clark_ocone_coefficients(sol, basis, 0, 0.5, std::span<const double>(&x, 1));
  EXPECT_NEAR(tab.monic[0], 2.0, 1e-6);
  EXPECT_NEAR(tab.orthonormal[0], 2.0 * std::sqrt(basis.norms2()[0]), 1e-6);
  EXPECT_NEAR(tab.orthonormal[1], 0.0, 1e-6);
}
