#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "levybsde/bsde.hpp"
#include "levybsde/orthobasis.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/simulator.hpp"

using namespace levybsde;

namespace {

LevyModel meixner_model() { return LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0}); }

void BM_GramSchmidt(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Matrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = nd(rng);
  const Matrix gram = a * a.transpose() / static_cast<double>(m) + 0.5 * Matrix::Identity(m, m);
  for (auto _ : state) benchmark::DoNotOptimize(gram_schmidt(gram));
}
BENCHMARK(BM_GramSchmidt)->Arg(6)->Arg(20)->Arg(60);

void BM_OrthoBasisMeixner(benchmark::State& state) {
  const auto model = meixner_model();
  const int D = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(OrthoBasis(model, D));
}
BENCHMARK(BM_OrthoBasisMeixner)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SimulateMeixnerPath(benchmark::State& state) {
  const Simulator sim(meixner_model(), 1e-3);
  JumpPath path;
  std::uint64_t i = 0;
  for (auto _ : state) {
    sim.fill(path, 1.0, 7, i++);
    benchmark::DoNotOptimize(path.times.data());
  }
}
BENCHMARK(BM_SimulateMeixnerPath);

void BM_PathSet2d(benchmark::State& state) {
  const auto model = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  const OrthoBasis basis(model, 2);
  const Simulator sim(model, 1e-3);
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_path_set(sim, basis, TimeGrid(1.0, 16), count, 3, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}
BENCHMARK(BM_PathSet2d)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_LinearPdie1d(benchmark::State& state) {
  const auto model = meixner_model();
  const PdieGrid grid{SpaceGrid({Axis{-8.0, 8.0, static_cast<int>(state.range(0))}}), TimeGrid(1.0, 100)};
  const std::vector<TerminalFunction> g{[](std::span<const double> x) { return std::tanh(x[0]); }};
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear_pdie(model, g, grid));
}
BENCHMARK(BM_LinearPdie1d)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_BsdeSolve(benchmark::State& state) {
  const auto model = poisson_copula_with_margins(1, 1, ClaytonCopulaParams{1, 1});
  const OrthoBasis basis(model, 2);
  const Simulator sim(model, 1e-3);
  const auto ps = simulate_path_set(sim, basis, TimeGrid(1.0, 16), 5000, 3, 1);
  const BsdeData data{linear_driver(0.3), [](std::span<const double> x) { return std::tanh(0.5 * (x[0] + x[1])); }};
  for (auto _ : state) benchmark::DoNotOptimize(solve_bsde(data, ps));
}
BENCHMARK(BM_BsdeSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
