#include "levybsde/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "levybsde/error.hpp"
#include "levybsde/parallel.hpp"

namespace levybsde {

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), N(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("horizon must be positive");
  if (steps < 1) throw ArgumentError("time grid needs at least one step");
}

Simulator::Simulator(const LevyModel& model, double eps)
    : model_(model), sampler_(model, eps) {
  if (model.has_brownian_part())
    throw ArgumentError("the path simulator handles pure-jump models only (sigma must be 0)");
  drift_ = compensator_mean(model) - sampler_.truncated_mean();
}

void Simulator::fill(JumpPath& out, double T, std::uint64_t seed, std::uint64_t index) const {
  if (!(T > 0.0)) throw ArgumentError("horizon must be positive");
  const std::size_t n = model_.dimension();
  out.n = n;
  out.T = T;
  out.eps = sampler_.eps();
  out.seed = seed;
  out.index = index;
  out.effective_drift = drift_;
  out.times.clear();
  out.jumps.clear();
  const double rate = sampler_.proposal_rate();
  if (rate <= 0.0) return;
  CounterRng rng(seed, index);
  double buf[8];
  std::vector<double> big(n > 8 ? n : 0);
  double* x = n > 8 ? big.data() : buf;
  double t = 0.0;
  for (;;) {
    t += rng.exponential() / rate;
    if (t > T) break;
    if (!sampler_.sample(rng, x)) continue;
    out.times.push_back(t);
    out.jumps.insert(out.jumps.end(), x, x + n);
  }
}

JumpPath Simulator::path(double T, std::uint64_t seed, std::uint64_t index) const {
  JumpPath p;
  fill(p, T, seed, index);
  return p;
}

Vector Simulator::terminal_state(double T, std::uint64_t seed, std::uint64_t index) const {
  const std::size_t n = model_.dimension();
  Vector x = drift_ * T;
  const double rate = sampler_.proposal_rate();
  if (rate <= 0.0) return x;
  CounterRng rng(seed, index);
  std::vector<double> buf(n);
  double t = 0.0;
  for (;;) {
    t += rng.exponential() / rate;
    if (t > T) break;
    if (!sampler_.sample(rng, buf.data())) continue;
    for (std::size_t i = 0; i < n; ++i) x[static_cast<Eigen::Index>(i)] += buf[i];
  }
  return x;
}

void Simulator::grid_states(const TimeGrid& grid, std::uint64_t seed, std::uint64_t index,
                            double* out) const {
  const std::size_t n = model_.dimension();
  const double rate = sampler_.proposal_rate();
  std::vector<double> jumps_sum(n, 0.0);
  std::vector<double> buf(n);
  CounterRng rng(seed, index);
  double t = rate > 0.0 ? rng.exponential() / rate : grid.T * 2.0 + 1.0;
  for (int k = 0; k <= grid.N; ++k) {
    const double tk = grid.t(k);
    while (t <= tk) {
      if (sampler_.sample(rng, buf.data()))
        for (std::size_t i = 0; i < n; ++i) jumps_sum[i] += buf[i];
      t += rng.exponential() / rate;
    }
    for (std::size_t i = 0; i < n; ++i)
      out[static_cast<std::size_t>(k) * n + i] = drift_[static_cast<Eigen::Index>(i)] * tk + jumps_sum[i];
  }
}

JumpPath simulate_path(const LevyModel& model, double T, double eps, std::uint64_t seed) {
  return Simulator(model, eps).path(T, seed, 0);
}

Vector state_at(const JumpPath& path, double t) {
  if (!(t >= 0.0 && t <= path.T * (1.0 + 1e-12)))
    throw ArgumentError("state_at: t outside [0, T]");
  Vector x = path.effective_drift * t;
  const auto end = std::upper_bound(path.times.begin(), path.times.end(), t);
  const auto count = static_cast<std::size_t>(end - path.times.begin());
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t i = 0; i < path.n; ++i)
      x[static_cast<Eigen::Index>(i)] += path.jumps[j * path.n + i];
  return x;
}

double power_jump_sum(const JumpPath& path, const MultiIndex& p, double t) {
  if (p.size() != path.n) throw ArgumentError("multi-index dimension mismatch");
  if (p.degree() < 1) throw ArgumentError("power jump sums need |p| >= 1");
  long double s = 0.0L;
  for (std::size_t j = 0; j < path.jump_count() && path.times[j] <= t; ++j)
    s += p.monomial(path.jump(j));
  return static_cast<double>(s);
}

namespace {

// Row-wise coefficient tables for the kept basis elements.
struct TeugelsMap {
  std::vector<std::size_t> kept;
  Matrix ptilde;  // K x N, degree-1 entries other than the leading one zeroed
  Matrix deg1;    // K x n
  Vector comp;    // K
  Vector scale;   // K, 1 or 1/||H^p||

  TeugelsMap(const OrthoBasis& b, bool orthonormal) : kept(b.kept_positions()) {
    const auto K = static_cast<Eigen::Index>(kept.size());
    const auto N = static_cast<Eigen::Index>(b.size());
    const auto n = static_cast<Eigen::Index>(b.dimension());
    ptilde = Matrix::Zero(K, N);
    deg1 = Matrix::Zero(K, n);
    comp = Vector::Zero(K);
    scale = Vector::Ones(K);
    for (Eigen::Index r = 0; r < K; ++r) {
      const auto k = static_cast<Eigen::Index>(kept[static_cast<std::size_t>(r)]);
      for (Eigen::Index j = 0; j <= k; ++j) {
        const double c = b.coefficients()(k, j);
        if (b.index(static_cast<std::size_t>(j)).degree() == 1) {
          deg1(r, j) = c;
        } else {
          ptilde(r, j) = c;
        }
      }
      comp[r] = b.ptilde_compensator(static_cast<std::size_t>(k));
      if (orthonormal) scale[r] = 1.0 / std::sqrt(b.norms2()[k]);
    }
  }
};

}  // namespace

void teugels_increments_into(const JumpPath& path, const OrthoBasis& basis, const TimeGrid& grid,
                             bool orthonormal, double* out) {
  if (basis.dimension() != path.n) throw ArgumentError("basis and path dimensions differ");
  if (std::abs(grid.T - path.T) > 1e-12 * std::max(1.0, path.T))
    throw ArgumentError("time grid horizon does not match the path");
  const TeugelsMap map(basis, orthonormal);
  const auto K = static_cast<Eigen::Index>(map.kept.size());
  const auto N = basis.size();
  const std::size_t n = path.n;
  const double dt = grid.dt();

  // Interval sums of all monomials x^q over the recorded jumps.
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(N), grid.N);
  for (std::size_t j = 0; j < path.jump_count(); ++j) {
    int k = static_cast<int>(std::ceil(path.times[j] / dt)) - 1;
    k = std::clamp(k, 0, grid.N - 1);
    const auto x = path.jump(j);
    for (std::size_t q = 0; q < N; ++q)
      sums(static_cast<Eigen::Index>(q), k) += basis.index(q).monomial(x);
  }
  const Vector& mean = basis.mean_drift();
  Vector dx(static_cast<Eigen::Index>(n));
  for (int k = 0; k < grid.N; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      // Degree-1 monomials come first in graded order, so row i of sums is
      // the jump part of dX_i.
      dx[ii] = (path.effective_drift[ii] - mean[ii]) * dt + sums(ii, k);
    }
    const Vector h = map.ptilde * sums.col(k) - map.comp * dt + map.deg1 * dx;
    for (Eigen::Index r = 0; r < K; ++r)
      out[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) + static_cast<std::size_t>(r)] =
          h[r] * map.scale[r];
  }
}

Matrix teugels_increments(const JumpPath& path, const OrthoBasis& basis, const TimeGrid& grid,
                          bool orthonormal) {
  const auto K = static_cast<Eigen::Index>(basis.kept_count());
  std::vector<double> buf(static_cast<std::size_t>(K) * static_cast<std::size_t>(grid.N));
  teugels_increments_into(path, basis, grid, orthonormal, buf.data());
  Matrix out(K, grid.N);
  for (int k = 0; k < grid.N; ++k)
    for (Eigen::Index r = 0; r < K; ++r)
      out(r, k) = buf[static_cast<std::size_t>(k) * static_cast<std::size_t>(K) + static_cast<std::size_t>(r)];
  return out;
}

Matrix stock_paths(const Vector& S0, double r, const JumpPath& path, const TimeGrid& grid) {
  if (S0.size() != static_cast<Eigen::Index>(path.n)) throw ArgumentError("S0 dimension mismatch");
  if ((S0.array() <= 0.0).any()) throw ArgumentError("S0 must be positive");
  Matrix out(grid.N + 1, S0.size());
  for (int k = 0; k <= grid.N; ++k) {
    const double t = grid.t(k);
    const Vector x = k == 0 ? Vector::Zero(S0.size()) : state_at(path, std::min(t, path.T));
    for (Eigen::Index i = 0; i < S0.size(); ++i) out(k, i) = S0[i] * std::exp(r * t + x[i]);
  }
  return out;
}

double jump_sum_residual(const std::vector<JumpPath>& paths, const JumpFunction& h,
                         const LevyModel& model, const OrthoBasis& basis) {
  if (paths.empty()) return 0.0;
  const double T = paths.front().T;
  const auto hint = integrate_jumps(model, h);
  if (!hint.converged) throw NumericalError("int h dnu: " + hint.diagnostic);
  const auto kept = basis.kept_positions();
  std::vector<double> coef;
  for (auto k : kept) {
    const auto r = integrate_jumps(model, [&](std::span<const double> y) {
      return h(y) * basis.polynomial_raw(k, y);
    });
    if (!r.converged) throw NumericalError("<h, p> integral: " + r.diagnostic);
    coef.push_back(r.value / basis.norms2()[static_cast<Eigen::Index>(k)]);
  }
  const TimeGrid grid(T, 1);
  long double acc = 0.0L;
  std::vector<double> inc(kept.size());
  for (const auto& path : paths) {
    long double lhs = 0.0L;
    for (std::size_t j = 0; j < path.jump_count(); ++j) lhs += h(path.jump(j));
    teugels_increments_into(path, basis, grid, false, inc.data());
    long double rhs = T * hint.value;
    for (std::size_t r = 0; r < kept.size(); ++r) rhs += coef[r] * inc[r];
    acc += (lhs - rhs) * (lhs - rhs);
  }
  return std::sqrt(static_cast<double>(acc / static_cast<long double>(paths.size())));
}

void for_each_path(const Simulator& sim, double T, std::uint64_t seed, std::size_t count,
                   int threads, const std::function<void(const JumpPath&, std::size_t)>& visit) {
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    JumpPath path;
    for (std::size_t i = begin; i < end; ++i) {
      sim.fill(path, T, seed, i);
      visit(path, i);
    }
  });
}

}  // namespace levybsde
