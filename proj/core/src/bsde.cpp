#include "levybsde/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "levybsde/error.hpp"
#include "levybsde/parallel.hpp"

namespace levybsde {

PathSet simulate_path_set(const Simulator& sim, const OrthoBasis& basis, const TimeGrid& grid,
                          std::size_t count, std::uint64_t seed, int threads) {
  const std::size_t n = sim.model().dimension();
  if (basis.dimension() != n) throw ArgumentError("basis and model dimensions differ");
  if (count == 0) throw ArgumentError("need at least one path");
  PathSet ps;
  ps.n = n;
  ps.count = count;
  ps.grid = grid;
  ps.seed = seed;
  ps.max_degree = basis.max_degree();
  ps.positions = basis.kept_positions();
  ps.K = ps.positions.size();
  for (auto p : ps.positions) ps.degrees.push_back(basis.index(p).degree());
  const auto N = static_cast<std::size_t>(grid.N);
  ps.states.assign(count * (N + 1) * n, 0.0);
  ps.increments.assign(count * N * ps.K, 0.0);
  for_each_path(sim, grid.T, seed, count, threads, [&](const JumpPath& path, std::size_t i) {
    double* st = ps.states.data() + i * (N + 1) * n;
    std::vector<double> sum(n, 0.0);
    std::size_t j = 0;
    for (int k = 0; k <= grid.N; ++k) {
      const double tk = grid.t(k);
      while (j < path.jump_count() && path.times[j] <= tk) {
        for (std::size_t c = 0; c < n; ++c) sum[c] += path.jumps[j * n + c];
        ++j;
      }
      for (std::size_t c = 0; c < n; ++c)
        st[static_cast<std::size_t>(k) * n + c] = path.effective_drift[static_cast<Eigen::Index>(c)] * tk + sum[c];
    }
    if (ps.K > 0) teugels_increments_into(path, basis, grid, true, ps.increments.data() + i * N * ps.K);
  });
  return ps;
}

double BsdeSolution::mean_y(int k) const {
  long double s = 0.0L;
  for (std::size_t i = 0; i < paths; ++i) s += y(k, i);
  return static_cast<double>(s / static_cast<long double>(paths));
}

double BsdeSolution::sd_y(int k) const {
  const double m = mean_y(k);
  long double s = 0.0L;
  for (std::size_t i = 0; i < paths; ++i) s += (y(k, i) - m) * (y(k, i) - m);
  return paths > 1 ? std::sqrt(static_cast<double>(s / static_cast<long double>(paths - 1))) : 0.0;
}

double BsdeSolution::mean_z(int k, std::size_t r) const {
  long double s = 0.0L;
  for (std::size_t i = 0; i < paths; ++i) s += z(k, i, r);
  return static_cast<double>(s / static_cast<long double>(paths));
}

BsdeSolution BsdeSolution::zeros(const PathSet& ps) {
  BsdeSolution s;
  s.grid = ps.grid;
  s.paths = ps.count;
  s.K = ps.K;
  s.Y.assign(static_cast<std::size_t>(ps.grid.N + 1) * ps.count, 0.0);
  s.Z.assign(static_cast<std::size_t>(ps.grid.N) * ps.count * ps.K, 0.0);
  return s;
}

// ---------------------------------------------------------------------------

struct Regressor::Step {
  Matrix q;  // orthonormal basis of the regressor span, paths x rank
};

Regressor::Regressor(const PathSet& ps, const BsdeData& data, const BsdeOptions& opts) {
  const std::size_t n = ps.n;
  std::vector<MultiIndex> mono{MultiIndex::zero(n)};
  for (const auto& p : graded_lex_enumerate(n, std::max(opts.regression_degree, 0))) mono.push_back(p);
  const bool with_payoff = opts.payoff_regressor && static_cast<bool>(data.terminal);
  const auto B = static_cast<Eigen::Index>(mono.size() + (with_payoff ? 1 : 0));
  const auto P = static_cast<Eigen::Index>(ps.count);
  steps_.resize(static_cast<std::size_t>(ps.grid.N));
  // t_0 is deterministic: projection is the plain mean.
  for (int k = 1; k < ps.grid.N; ++k) {
    Matrix design(P, B);
    for (Eigen::Index i = 0; i < P; ++i) {
      const auto x = ps.state(static_cast<std::size_t>(i), k);
      for (std::size_t q = 0; q < mono.size(); ++q)
        design(i, static_cast<Eigen::Index>(q)) = mono[q].monomial(x);
      if (with_payoff) design(i, B - 1) = data.terminal(x);
    }
    for (Eigen::Index c = 0; c < B; ++c) {
      const double rms = std::sqrt(design.col(c).squaredNorm() / static_cast<double>(P));
      if (rms > 0.0) design.col(c) /= rms;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr;
    qr.setThreshold(1e-9);
    qr.compute(design);
    const auto rank = qr.rank();
    if (rank < B) {
      if (!opts.allow_rank_deficient) {
        std::ostringstream os;
        os << "regression at t_" << k << " has rank " << rank << " < " << B
           << " regressors; lower regression_degree or disable the payoff regressor";
        throw DegeneracyError(os.str());
      }
      dropped_ += static_cast<int>(B - rank);
    }
    // Fitted values are Q Q^T v.
    auto step = std::make_shared<Step>();
    step->q = qr.householderQ() * Matrix::Identity(P, rank);
    steps_[static_cast<std::size_t>(k)] = std::move(step);
  }
}

std::vector<double> Regressor::project(int k, const std::vector<double>& v) const {
  const auto& step = steps_.at(static_cast<std::size_t>(k));
  if (!step) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return std::vector<double>(v.size(), static_cast<double>(s / static_cast<long double>(v.size())));
  }
  const Eigen::Map<const Vector> rhs(v.data(), static_cast<Eigen::Index>(v.size()));
  const Vector fit = step->q * (step->q.transpose() * rhs);
  return {fit.data(), fit.data() + fit.size()};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> terminal_values(const PathSet& ps, const BsdeData& data) {
  if (!data.terminal) throw ArgumentError("BSDE data needs a terminal function");
  std::vector<double> xi(ps.count);
  for (std::size_t i = 0; i < ps.count; ++i) {
    xi[i] = data.terminal(ps.state(i, ps.grid.N));
    if (!std::isfinite(xi[i])) throw DomainError("terminal value is not finite on a path");
  }
  return xi;
}

// f(t_k, Y_k, Z_k) on every path.
std::vector<double> driver_values(const BsdeSolution& s, const DriverFunction& f, int k, int threads) {
  std::vector<double> out(s.paths, 0.0);
  if (f.is_zero()) return out;
  const double t = s.grid.t(k);
  parallel_for(s.paths, threads, [&](std::size_t b, std::size_t e) {
    Vector y(1);
    Matrix z(1, static_cast<Eigen::Index>(s.K));
    for (std::size_t i = b; i < e; ++i) {
      y[0] = s.y(k, i);
      for (std::size_t r = 0; r < s.K; ++r) z(0, static_cast<Eigen::Index>(r)) = s.z(k, i, r);
      out[i] = f(t, y, z)[0];
    }
  });
  return out;
}

double resolve_beta(const BsdeData& data, const BsdeOptions& opts) {
  if (opts.beta >= 0.0) return opts.beta;
  const double C = data.driver.lipschitz;
  return 4.0 * C * C + 1.0;
}

int truncation(const PathSet& ps, const BsdeData& data) {
  if (data.degree > ps.max_degree)
    throw ArgumentError("truncation degree exceeds the basis degree");
  return data.degree < 0 ? ps.max_degree : data.degree;
}

}  // namespace

BsdeSolution picard_iterate(const BsdeSolution& cur, const BsdeData& data, const PathSet& ps,
                            const Regressor& reg, const BsdeOptions& opts) {
  if (cur.paths != ps.count || cur.grid.N != ps.grid.N || cur.K != ps.K)
    throw ArgumentError("iterate does not match the path set");
  const int D = truncation(ps, data);
  const std::size_t P = ps.count;
  const int N = ps.grid.N;
  const double dt = ps.grid.dt();
  BsdeSolution next = BsdeSolution::zeros(ps);
  next.dropped_regressors = reg.dropped();

  std::vector<double> S = terminal_values(ps, data);
  for (std::size_t i = 0; i < P; ++i) next.y(N, i) = S[i];
  std::vector<double> v(P);
  for (int k = N - 1; k >= 0; --k) {
    for (std::size_t r = 0; r < ps.K; ++r) {
      if (ps.degrees[r] > D) continue;
      for (std::size_t i = 0; i < P; ++i) v[i] = S[i] * ps.increment(i, k)[r];
      const auto fit = reg.project(k, v);
      for (std::size_t i = 0; i < P; ++i) next.z(k, i, r) = fit[i] / dt;
    }
    const auto f = driver_values(cur, data.driver, k, opts.threads);
    for (std::size_t i = 0; i < P; ++i) S[i] += f[i] * dt;
    const auto fit = reg.project(k, S);
    for (std::size_t i = 0; i < P; ++i) next.y(k, i) = fit[i];
  }
  return next;
}

BsdeSolution picard_iterate(const BsdeSolution& cur, const BsdeData& data, const PathSet& ps,
                            const BsdeOptions& opts) {
  const Regressor reg(ps, data, opts);
  return picard_iterate(cur, data, ps, reg, opts);
}

double beta_norm(const BsdeSolution& a, const BsdeSolution& b, double beta) {
  if (a.paths != b.paths || a.grid.N != b.grid.N || a.K != b.K)
    throw ArgumentError("beta_norm: solutions live on different grids or path sets");
  const double dt = a.grid.dt();
  long double total = 0.0L;
  for (int k = 0; k < a.grid.N; ++k) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.paths; ++i) {
      const double dy = a.y(k, i) - b.y(k, i);
      s += dy * dy;
      for (std::size_t r = 0; r < a.K; ++r) {
        const double dz = a.z(k, i, r) - b.z(k, i, r);
        s += dz * dz;
      }
    }
    total += std::exp(beta * a.grid.t(k)) * s / static_cast<long double>(a.paths) * dt;
  }
  return std::sqrt(static_cast<double>(total));
}

std::vector<BsdeSolution> picard_sequence(const BsdeData& data, const PathSet& ps, int count,
                                          const BsdeOptions& opts) {
  const Regressor reg(ps, data, opts);
  std::vector<BsdeSolution> out;
  out.push_back(BsdeSolution::zeros(ps));
  for (int it = 0; it < count; ++it) out.push_back(picard_iterate(out.back(), data, ps, reg, opts));
  return out;
}

BsdeSolution solve_bsde(const BsdeData& data, const PathSet& ps, const BsdeOptions& opts) {
  const Regressor reg(ps, data, opts);
  const double beta = resolve_beta(data, opts);
  const BsdeSolution zero = BsdeSolution::zeros(ps);
  BsdeSolution cur = zero;
  std::vector<double> trace;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    BsdeSolution next = picard_iterate(cur, data, ps, reg, opts);
    const double d = beta_norm(next, cur, beta);
    const double norm = beta_norm(next, zero, beta);
    trace.push_back(d);
    if (d < opts.tolerance * (1.0 + norm) || (it == 1 && data.driver.is_zero())) {
      next.iterations = it;
      next.residuals = trace;
      return next;
    }
    cur = std::move(next);
  }
  std::ostringstream os;
  os << "Picard iteration did not converge in " << opts.max_iterations << " steps; residuals:";
  for (double d : trace) os << ' ' << d;
  throw NumericalError(os.str());
}

StabilityReport stability_check(const BsdeData& a, const BsdeData& b, const PathSet& ps,
                                const BsdeOptions& opts) {
  const BsdeSolution sa = solve_bsde(a, ps, opts);
  const BsdeSolution sb = solve_bsde(b, ps, opts);
  StabilityReport rep;
  rep.lhs = beta_norm(sa, sb, 0.0);
  rep.lhs *= rep.lhs;
  const auto xa = terminal_values(ps, a);
  const auto xb = terminal_values(ps, b);
  long double dxi = 0.0L;
  for (std::size_t i = 0; i < ps.count; ++i) dxi += (xa[i] - xb[i]) * (xa[i] - xb[i]);
  long double df = 0.0L;
  for (int k = 0; k < ps.grid.N; ++k) {
    const auto fa = driver_values(sa, a.driver, k, opts.threads);
    const auto fb = driver_values(sa, b.driver, k, opts.threads);
    for (std::size_t i = 0; i < ps.count; ++i) df += (fa[i] - fb[i]) * (fa[i] - fb[i]) * ps.grid.dt();
  }
  rep.rhs = static_cast<double>((dxi + df) / static_cast<long double>(ps.count));
  return rep;
}

namespace {

void finish(Reconstruction& rec) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < rec.value.size(); ++i)
    s += (rec.value[i] - rec.target[i]) * (rec.value[i] - rec.target[i]);
  rec.rms_error = std::sqrt(static_cast<double>(s / static_cast<long double>(rec.value.size())));
}

}  // namespace

Reconstruction clark_ocone_reconstruct(const PathSet& ps, const BsdeSolution& sol,
                                       const BsdeData& data, int degree) {
  if (degree > ps.max_degree) throw ArgumentError("reconstruction degree exceeds the basis degree");
  if (sol.paths != ps.count || sol.K != ps.K) throw ArgumentError("solution does not match the path set");
  Reconstruction rec;
  rec.target = terminal_values(ps, data);
  rec.value.assign(ps.count, sol.y(0, 0));
  for (int k = 0; k < ps.grid.N; ++k) {
    const auto f = driver_values(sol, data.driver, k, 1);
    for (std::size_t i = 0; i < ps.count; ++i) {
      long double acc = -f[i] * ps.grid.dt();
      const auto dh = ps.increment(i, k);
      for (std::size_t r = 0; r < ps.K; ++r)
        if (ps.degrees[r] <= degree) acc += sol.z(k, i, r) * dh[r];
      rec.value[i] += static_cast<double>(acc);
    }
  }
  finish(rec);
  return rec;
}

Reconstruction clark_ocone_reconstruct(const PathSet& ps, const GridSolution& sol,
                                       const OrthoBasis& basis,
                                       const std::function<double(std::span<const double>)>& terminal,
                                       int degree, std::size_t component, int threads) {
  if (degree > basis.max_degree()) throw ArgumentError("reconstruction degree exceeds the basis degree");
  if (basis.kept_positions() != ps.positions)
    throw ArgumentError("path set increments were built from a different basis");
  const CoefficientEvaluator eval(sol, basis);
  Reconstruction rec;
  BsdeData data;
  data.terminal = terminal;
  rec.target = terminal_values(ps, data);
  const double start = sol.value(component, 0.0, ps.state(0, 0));
  rec.value.assign(ps.count, start);
  parallel_for(ps.count, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      long double acc = 0.0L;
      for (int k = 0; k < ps.grid.N; ++k) {
        const auto tab = eval(component, ps.grid.t(k), ps.state(i, k));
        const auto dh = ps.increment(i, k);
        for (std::size_t r = 0; r < ps.K; ++r)
          if (ps.degrees[r] <= degree) acc += tab.orthonormal[static_cast<Eigen::Index>(r)] * dh[r];
      }
      rec.value[i] += static_cast<double>(acc);
    }
  });
  finish(rec);
  return rec;
}

}  // namespace levybsde
