#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "levybsde/jump_sampler.hpp"
#include "levybsde/levy_model.hpp"
#include "levybsde/measure.hpp"
#include "levybsde/orthobasis.hpp"

namespace levybsde {

/// Uniform grid t_k = k T / N.
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps);
  double dt() const noexcept { return T / N; }
  double t(int k) const noexcept { return k == N ? T : T * k / N; }
};

/// One simulated trajectory: sorted jump times in (0, T] with jump
/// vectors, on top of a linear drift.
struct JumpPath {
  std::size_t n = 1;
  double T = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  Vector effective_drift;
  std::vector<double> times;
  std::vector<double> jumps;  // row-major, n per jump

  std::size_t jump_count() const noexcept { return times.size(); }
  std::span<const double> jump(std::size_t i) const { return {jumps.data() + i * n, n}; }
};

/// Seeded compound-Poisson approximation of a pure-jump Lévy process.
class Simulator {
 public:
  Simulator(const LevyModel& model, double eps = 1e-3);

  const LevyModel& model() const noexcept { return model_; }
  double eps() const noexcept { return sampler_.eps(); }
  /// a - int_{simulated set, ||y|| < 1} y nu(dy); makes E[X(t)] = a~ t.
  const Vector& effective_drift() const noexcept { return drift_; }
  const JumpSampler& sampler() const noexcept { return sampler_; }

  JumpPath path(double T, std::uint64_t seed, std::uint64_t index = 0) const;
  /// Refills `out`, reusing its buffers.
  void fill(JumpPath& out, double T, std::uint64_t seed, std::uint64_t index) const;
  /// X(T) only, without storing jumps.
  Vector terminal_state(double T, std::uint64_t seed, std::uint64_t index) const;
  /// X(t_k) for k = 0..N, row-major (N+1) x n.
  void grid_states(const TimeGrid& grid, std::uint64_t seed, std::uint64_t index,
                   double* out) const;

 private:
  LevyModel model_;
  JumpSampler sampler_;
  Vector drift_;
};

JumpPath simulate_path(const LevyModel& model, double T, double eps, std::uint64_t seed);

/// X(t) = drift t + sum_{s <= t} jumps.
Vector state_at(const JumpPath& path, double t);

/// sum_{0 < s <= t} prod_i (dX_i(s))^{p_i}.
double power_jump_sum(const JumpPath& path, const MultiIndex& p, double t);

/// Per kept basis index (rows, in basis order) and grid interval (columns):
/// increments of H^p, or of H^p / ||H^p|| when orthonormal is set.
Matrix teugels_increments(const JumpPath& path, const OrthoBasis& basis, const TimeGrid& grid,
                          bool orthonormal = false);

/// Same, written into a caller buffer of kept_count() * N doubles laid out
/// interval-major (interval k occupies [k*K, (k+1)*K)).
void teugels_increments_into(const JumpPath& path, const OrthoBasis& basis,
                             const TimeGrid& grid, bool orthonormal, double* out);

/// S_i(t_k) = S0_i exp(r t_k + X_i(t_k)); (N+1) x n.
Matrix stock_paths(const Vector& S0, double r, const JumpPath& path, const TimeGrid& grid);

/// Monte-Carlo L2 norm of sum_{0 < s <= T} h(dX(s)) - T int h dnu
/// - sum_p <h, p^p>_nu / ||H^p||^2 H^p(T), p over kept basis indices.
double jump_sum_residual(const std::vector<JumpPath>& paths, const JumpFunction& h,
                         const LevyModel& model, const OrthoBasis& basis);

/// Generates paths [0, count) in parallel and hands each one to visit
/// (path, index). Each worker reuses one JumpPath buffer.
void for_each_path(const Simulator& sim, double T, std::uint64_t seed, std::size_t count,
                   int threads, const std::function<void(const JumpPath&, std::size_t)>& visit);

}  // namespace levybsde
