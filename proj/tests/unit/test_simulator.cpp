#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/simulator.hpp"

using namespace levybsde;

TEST(Simulator, ZeroMeasureIsPureDrift) {
  Vector a(2);
  a << 0.3, -0.2;
  const auto m = LevyModel::pure_drift(a);
  const auto path = simulate_path(m, 2.0, 1e-3, 5);
  EXPECT_EQ(path.jump_count(), 0u);
  const Vector x = state_at(path, 1.5);
  EXPECT_DOUBLE_EQ(x[0], 0.45);
  EXPECT_DOUBLE_EQ(x[1], -0.3);
}

TEST(Simulator, SeededPathsAreIdentical) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.3, 1.0, 0.0});
  const Simulator sim(m, 1e-3);
  const auto a = sim.path(1.0, 42, 7);
  const auto b = sim.path(1.0, 42, 7);
  const auto c = sim.path(1.0, 42, 8);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.jumps, b.jumps);
  EXPECT_NE(a.times, c.times);
}

TEST(Simulator, RejectsBrownianPart) {
  const auto m = LevyModel::meixner(MeixnerParams{}).with_sigma(Matrix::Identity(1, 1));
  EXPECT_THROW(Simulator(m, 1e-3), std::exception);
}

TEST(Simulator, JumpsRespectTruncation) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  const auto path = simulate_path(m, 1.0, 1e-2, 3);
  ASSERT_GT(path.jump_count(), 0u);
  for (std::size_t j = 0; j < path.jump_count(); ++j) EXPECT_GE(std::abs(path.jump(j)[0]), 1e-2);
  for (std::size_t j = 1; j < path.jump_count(); ++j) EXPECT_LE(path.times[j - 1], path.times[j]);
}

TEST(Simulator, MeanMatchesCompensatedDrift) {
  const auto m = LevyModel::meixner(MeixnerParams{1.0, 0.6, 1.0, 0.0}, 0.1);
  const Simulator sim(m, 1e-3);
  const double target = compensator_mean(m)[0];
  const int P = 20000;
  double s = 0, s2 = 0;
  for (int i = 0; i < P; ++i) {
    const double x = sim.terminal_state(1.0, 9, static_cast<std::uint64_t>(i))[0];
    s += x;
    s2 += x * x;
  }
  const double mean = s / P, se = std::sqrt((s2 / P - mean * mean) / P);
  EXPECT_LT(std::abs(mean - target), 3.5 * se);
}

TEST(Simulator, AtomicJumpCount) {
  const auto m = common_poisson_measure(1, 1, ClaytonCopulaParams{1, 1});
  const Simulator sim(m, 1e-3);
  const int P = 100000;
  double count = 0;
  JumpPath path;
  for (int i = 0; i < P; ++i) {
    sim.fill(path, 4.0, 123, static_cast<std::uint64_t>(i));
    count += static_cast<double>(path.jump_count());
  }
  EXPECT_LT(std::abs(count / P - 1.0), 3 * std::sqrt(1.0 / P));
}

TEST(Simulator, PowerJumpSumOfAtoms) {
  const auto m = LevyModel::atomic(Vector::Zero(1), {Atom{Vector::Constant(1, 2.0), 3.0}});
  const auto path = simulate_path(m, 1.0, 1e-3, 1);
  EXPECT_DOUBLE_EQ(power_jump_sum(path, MultiIndex{3}, 1.0), 8.0 * static_cast<double>(path.jump_count()));
}

TEST(Simulator, TeugelsIncrementsHaveZeroMeanUnitBracket) {
  const auto m = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  const OrthoBasis basis(m, 2);
  const Simulator sim(m, 1e-3);
  const TimeGrid grid(1.0, 1);
  const int P = 40000;
  const std::size_t K = basis.kept_count();
  std::vector<double> mean(K, 0.0), sq(K, 0.0);
  for (int i = 0; i < P; ++i) {
    const auto path = sim.path(1.0, 77, static_cast<std::uint64_t>(i));
    const Matrix inc = teugels_increments(path, basis, grid, true);
    for (std::size_t r = 0; r < K; ++r) {
      mean[r] += inc(static_cast<Eigen::Index>(r), 0) / P;
      sq[r] += inc(static_cast<Eigen::Index>(r), 0) * inc(static_cast<Eigen::Index>(r), 0) / P;
    }
  }
  for (std::size_t r = 0; r < K; ++r) {
    EXPECT_NEAR(mean[r], 0.0, 4 * std::sqrt(1.0 / P));
    EXPECT_NEAR(sq[r], 1.0, 0.05);
  }
}
