#include "levybsde/pricing.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "levybsde/error.hpp"
#include "levybsde/parallel.hpp"
#include "levybsde/rng.hpp"
#include "levybsde/simulator.hpp"

namespace levybsde {

void MarketSpec::validate() const {
  if (S0.size() != static_cast<Eigen::Index>(model.dimension()))
    throw ArgumentError("S0 must have one entry per asset");
  if ((S0.array() <= 0.0).any() || !S0.allFinite()) throw ArgumentError("S0 must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("maturity must be positive");
  if (!std::isfinite(r)) throw ArgumentError("rate must be finite");
}

Payoff Payoff::call(std::size_t asset, double strike) {
  if (!(strike >= 0.0)) throw ArgumentError("strike must be nonnegative");
  Payoff p;
  p.kind = Kind::Call;
  p.asset = asset;
  p.strike = strike;
  return p;
}

Payoff Payoff::put(std::size_t asset, double strike) {
  Payoff p = call(asset, strike);
  p.kind = Kind::Put;
  return p;
}

Payoff Payoff::basket_call(Vector weights, double strike) {
  if (weights.size() == 0) throw ArgumentError("basket needs weights");
  Payoff p;
  p.kind = Kind::BasketCall;
  p.strike = strike;
  p.lipschitz = weights.cwiseAbs().sum();
  p.weights = std::move(weights);
  return p;
}

Payoff Payoff::make_custom(std::function<double(std::span<const double>)> g, double lipschitz) {
  if (!g) throw ArgumentError("custom payoff needs a function");
  Payoff p;
  p.kind = Kind::Custom;
  p.custom = std::move(g);
  p.lipschitz = lipschitz;
  return p;
}

double Payoff::operator()(std::span<const double> S) const {
  switch (kind) {
    case Kind::Call:
      if (asset >= S.size()) throw ArgumentError("payoff asset index out of range");
      return std::max(S[asset] - strike, 0.0);
    case Kind::Put:
      if (asset >= S.size()) throw ArgumentError("payoff asset index out of range");
      return std::max(strike - S[asset], 0.0);
    case Kind::BasketCall: {
      if (static_cast<std::size_t>(weights.size()) != S.size())
        throw ArgumentError("basket weights do not match the asset count");
      double b = 0.0;
      for (std::size_t i = 0; i < S.size(); ++i) b += weights[static_cast<Eigen::Index>(i)] * S[i];
      return std::max(b - strike, 0.0);
    }
    case Kind::Custom:
      return custom(S);
  }
  return 0.0;
}

Vector check_martingale_condition(const LevyModel& model) {
  const Vector comp = exponential_compensator(model);
  Vector res(static_cast<Eigen::Index>(model.dimension()));
  for (Eigen::Index j = 0; j < res.size(); ++j)
    res[j] = 0.5 * model.sigma()(j, j) + model.drift()[j] + comp[j];
  return res;
}

namespace {

constexpr std::uint64_t kGaussianStream = 0x9e3779b97f4a7c15ULL;

// e^{-rT} h(S(T)) per path.
std::vector<McPrice> mc_mean(const MarketSpec& market, std::size_t npaths, std::uint64_t seed,
                             const McOptions& opts,
                             const std::vector<std::function<double(std::span<const double>)>>& h) {
  market.validate();
  if (npaths == 0) throw ArgumentError("need at least one path");
  const std::size_t n = market.model.dimension();
  const bool gaussian = market.model.has_brownian_part();
  const LevyModel jumps = gaussian ? market.model.with_sigma(Matrix()) : market.model;
  const Simulator sim(jumps, opts.eps);
  Matrix chol;
  if (gaussian) {
    Eigen::LDLT<Matrix> ldlt(market.model.sigma());
    const Matrix L = ldlt.matrixL();
    const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    chol = ldlt.transpositionsP().transpose() * L * d.asDiagonal();
  }
  const double disc = std::exp(-market.r * market.T);
  const std::size_t m = h.size();
  std::vector<double> values(npaths * m);
  parallel_for(npaths, opts.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> S(n);
    Vector g(static_cast<Eigen::Index>(n));
    for (std::size_t i = b; i < e; ++i) {
      Vector x = sim.terminal_state(market.T, seed, i);
      if (gaussian) {
        CounterRng rng(seed ^ kGaussianStream, i);
        for (Eigen::Index c = 0; c < g.size(); ++c) g[c] = rng.normal();
        x += chol * g * std::sqrt(market.T);
      }
      for (std::size_t c = 0; c < n; ++c) {
        const auto cc = static_cast<Eigen::Index>(c);
        S[c] = market.S0[cc] * std::exp(market.r * market.T + x[cc]);
      }
      for (std::size_t q = 0; q < m; ++q) values[i * m + q] = disc * h[q](S);
    }
  });
  std::vector<McPrice> out(m);
  for (std::size_t q = 0; q < m; ++q) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < npaths; ++i) s += values[i * m + q];
    const long double mean = s / static_cast<long double>(npaths);
    long double ss = 0.0L;
    for (std::size_t i = 0; i < npaths; ++i) ss += (values[i * m + q] - mean) * (values[i * m + q] - mean);
    out[q].price = static_cast<double>(mean);
    out[q].stderr_ = npaths > 1 ? std::sqrt(static_cast<double>(ss / static_cast<long double>(npaths - 1)) /
                                            static_cast<double>(npaths))
                                : 0.0;
    out[q].paths = npaths;
    out[q].seed = seed;
  }
  return out;
}

}  // namespace

McPrice price_mc(const MarketSpec& market, const Payoff& payoff, std::size_t npaths,
                 std::uint64_t seed, const McOptions& opts) {
  return price_mc(market, std::vector<Payoff>{payoff}, npaths, seed, opts).front();
}

std::vector<McPrice> price_mc(const MarketSpec& market, const std::vector<Payoff>& payoffs,
                              std::size_t npaths, std::uint64_t seed, const McOptions& opts) {
  std::vector<std::function<double(std::span<const double>)>> h;
  for (const auto& p : payoffs) h.emplace_back([&p](std::span<const double> S) { return p(S); });
  return mc_mean(market, npaths, seed, opts, h);
}

McPrice discounted_stock_mc(const MarketSpec& market, std::size_t asset, std::size_t npaths,
                            std::uint64_t seed, const McOptions& opts) {
  if (asset >= market.model.dimension()) throw ArgumentError("asset index out of range");
  return mc_mean(market, npaths, seed, opts, {[asset](std::span<const double> S) { return S[asset]; }})
      .front();
}

double PidePrice::value(double t, std::span<const double> S) const {
  std::vector<double> x(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) x[i] = std::log(S[i] / S0[static_cast<Eigen::Index>(i)]);
  return std::exp(-r * (T - t)) * solution->value(0, t, x);
}

PidePrice price_pide(const MarketSpec& market, const Payoff& payoff, const PideGridSpec& spec) {
  market.validate();
  const std::size_t n = market.model.dimension();
  if (!(spec.half_width > 0.0)) throw ArgumentError("grid half width must be positive");
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n; ++i) {
    Axis a{-spec.half_width, spec.half_width, spec.nodes};
    if (payoff.has_kink() && payoff.asset == i && payoff.strike > 0.0) {
      const double h = a.h();
      const double xk = std::log(payoff.strike / market.S0[static_cast<Eigen::Index>(i)]);
      const double shift = xk - (a.lower + std::round((xk - a.lower) / h) * h);
      a.lower += shift;
      a.upper += shift;
    }
    axes.push_back(a);
  }
  const LevyModel shifted =
      market.model.with_drift(market.model.drift() + Vector::Constant(static_cast<Eigen::Index>(n), market.r));
  const Vector S0 = market.S0;
  const TerminalFunction g = [S0, payoff, n](std::span<const double> x) {
    std::vector<double> S(n);
    for (std::size_t i = 0; i < n; ++i) S[i] = S0[static_cast<Eigen::Index>(i)] * std::exp(x[i]);
    return payoff(S);
  };
  int steps = spec.steps > 0 ? spec.steps : std::max(spec.min_steps, 1);
  PdieGrid grid{SpaceGrid(axes), TimeGrid(market.T, steps)};
  std::shared_ptr<const GridSolution> sol;
  try {
    sol = std::make_shared<const GridSolution>(solve_linear_pdie(shifted, {g}, grid, spec.pdie));
  } catch (const StepSizeError& e) {
    if (spec.steps > 0) throw;
    steps = e.suggested_steps();
    grid.time = TimeGrid(market.T, steps);
    sol = std::make_shared<const GridSolution>(solve_linear_pdie(shifted, {g}, grid, spec.pdie));
  }
  PidePrice out;
  out.solution = sol;
  out.S0 = S0;
  out.r = market.r;
  out.T = market.T;
  out.steps = steps;
  const std::vector<double> origin(n, 0.0);
  out.price = std::exp(-market.r * market.T) * sol->value(0, 0.0, origin);
  return out;
}

}  // namespace levybsde
