#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/bsde.hpp"
#include "levybsde/error.hpp"

using namespace levybsde;

namespace {

struct Fixture {
  LevyModel model = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  OrthoBasis basis{model, 2};
  Simulator sim{model, 1e-3};
  PathSet paths = simulate_path_set(sim, basis, TimeGrid(1.0, 8), 4000, 11);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double smooth(std::span<const double> x) { return std::tanh(0.5 * (x[0] + x[1])); }

}  // namespace

TEST(Bsde, ConstantTerminalZeroDriver) {
  const auto& f = fixture();
  const auto sol = solve_bsde(BsdeData{zero_driver(), [](std::span<const double>) { return 1.5; }}, f.paths);
  for (double y : sol.Y) EXPECT_NEAR(y, 1.5, 1e-12);
  // Z is a regression of 1.5 * dH on state; constants are in the basis, so
  // its path mean is exactly the sample mean of 1.5 * dH / dt.
  const auto& ps = f.paths;
  const double dt = ps.grid.dt();
  for (int k = 0; k < ps.grid.N; ++k)
    for (std::size_t r = 0; r < ps.K; ++r) {
      double zm = 0.0, hm = 0.0;
      for (std::size_t i = 0; i < ps.count; ++i) {
        zm += sol.z(k, i, r);
        hm += ps.increment(i, k)[r];
      }
      zm /= static_cast<double>(ps.count);
      hm /= static_cast<double>(ps.count);
      EXPECT_NEAR(zm, 1.5 * hm / dt, 1e-9);
      EXPECT_LT(std::abs(zm), 4.0 * 1.5 / std::sqrt(static_cast<double>(ps.count) * dt));
    }
  EXPECT_EQ(sol.iterations, 1);
}

TEST(Bsde, ZeroDriverY0IsSampleMean) {
  const auto& f = fixture();
  const auto sol = solve_bsde(BsdeData{zero_driver(), smooth}, f.paths);
  double mean = 0.0;
  for (std::size_t i = 0; i < f.paths.count; ++i) mean += smooth(f.paths.state(i, f.paths.grid.N));
  mean /= static_cast<double>(f.paths.count);
  EXPECT_NEAR(sol.y(0, 0), mean, 1e-12);
}

TEST(Bsde, LinearDriverBackwardRecursion) {
  // Y_k = Y_{k+1} + r Y_k dt with xi = 1.
  const auto& f = fixture();
  BsdeOptions opts;
  opts.tolerance = 1e-12;
  opts.max_iterations = 60;
  const double r = 0.4;
  const auto sol = solve_bsde(BsdeData{linear_driver(r), [](std::span<const double>) { return 1.0; }},
                              f.paths, opts);
  const double dt = f.paths.grid.dt();
  EXPECT_NEAR(sol.y(0, 0), std::pow(1.0 - r * dt, -f.paths.grid.N), 1e-9);
}

TEST(Bsde, PicardStopsWithTraceWhenBudgetIsTooSmall) {
  const auto& f = fixture();
  BsdeOptions opts;
  opts.max_iterations = 2;
  opts.tolerance = 1e-14;
  try {
    solve_bsde(BsdeData{mixed_driver(0.25, 0.25), smooth}, f.paths, opts);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(Bsde, ContractionOnFixture) {
  const auto& f = fixture();
  const auto seq = picard_sequence(BsdeData{mixed_driver(0.25, 0.25), smooth}, f.paths, 5);
  ASSERT_EQ(seq.size(), 6u);
  for (std::size_t k = 2; k + 1 < seq.size(); ++k)
    EXPECT_LE(beta_norm(seq[k + 1], seq[k], 2.0), 0.65 * beta_norm(seq[k], seq[k - 1], 2.0));
}

TEST(Bsde, BetaNormOfIdenticalSolutionsIsZero) {
  const auto& f = fixture();
  const auto sol = solve_bsde(BsdeData{sine_driver(0.3), smooth}, f.paths);
  EXPECT_EQ(beta_norm(sol, sol, 2.0), 0.0);
}

TEST(Bsde, StabilityIsQuadraticInShift) {
  const auto& f = fixture();
  const BsdeData a{mixed_driver(0.25, 0.25), smooth};
  std::vector<double> lhs;
  for (double s : {1.0, 0.5}) {
    BsdeData b = a;
    b.terminal = [s](std::span<const double> x) { return smooth(x) + s; };
    const auto rep = stability_check(a, b, f.paths);
    EXPECT_GT(rep.rhs, 0.0);
    lhs.push_back(rep.lhs);
  }
  EXPECT_NEAR(lhs[0] / lhs[1], 4.0, 0.6);
}

TEST(Bsde, ReconstructionOfZeroDriverSolution) {
  const auto& f = fixture();
  const BsdeData data{zero_driver(), smooth};
  const auto sol = solve_bsde(data, f.paths);
  const auto rec = clark_ocone_reconstruct(f.paths, sol, data, 2);
  double var = 0.0, mean = 0.0;
  for (double t : rec.target) mean += t / static_cast<double>(rec.target.size());
  for (double t : rec.target) var += (t - mean) * (t - mean) / static_cast<double>(rec.target.size());
  // Most of the variance of xi is explained by the martingale part.
  EXPECT_LT(rec.rms_error * rec.rms_error, 0.25 * var);
}

TEST(Bsde, RankDeficiencyCanBeMadeAnError) {
  // Lattice states at t_1 take few values, so degree-2 monomials collide.
  const auto m = LevyModel::atomic(Vector::Constant(1, -1.0), {Atom{Vector::Ones(1), 1.0}});
  const OrthoBasis basis(m, 1);
  const Simulator sim(m, 1e-3);
  const auto ps = simulate_path_set(sim, basis, TimeGrid(0.05, 4), 500, 3);
  const BsdeData data{zero_driver(), [](std::span<const double> x) { return x[0] * x[0]; }};
  BsdeOptions opts;
  EXPECT_NO_THROW(solve_bsde(data, ps, opts));
  opts.allow_rank_deficient = false;
  EXPECT_THROW(solve_bsde(data, ps, opts), DegeneracyError);
}
