#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "levybsde/levy_model.hpp"
#include "levybsde/pdie.hpp"

namespace levybsde {

/// S_i(t) = S0_i exp(r t + X_i(t)) with X risk-neutral.
struct MarketSpec {
  LevyModel model;
  Vector S0;
  double r = 0.0;
  double T = 1.0;

  void validate() const;
};

struct Payoff {
  enum class Kind { Call, Put, BasketCall, Custom };
  Kind kind = Kind::Call;
  std::size_t asset = 0;
  double strike = 0.0;
  Vector weights;
  std::function<double(std::span<const double>)> custom;
  double lipschitz = 1.0;

  static Payoff call(std::size_t asset, double strike);
  static Payoff put(std::size_t asset, double strike);
  static Payoff basket_call(Vector weights, double strike);
  static Payoff make_custom(std::function<double(std::span<const double>)> g, double lipschitz);

  double operator()(std::span<const double> S) const;
  /// Strike used for grid snapping, if the payoff has a single-asset kink.
  bool has_kink() const noexcept { return kind == Kind::Call || kind == Kind::Put; }
};

/// Per asset: sigma_jj / 2 + a_j + int (e^{z_j} - 1 - z_j 1{|z| <= 1}) nu(dz).
Vector check_martingale_condition(const LevyModel& model);

struct McPrice {
  double price = 0.0;
  double stderr_ = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

struct McOptions {
  double eps = 1e-3;
  int threads = 0;
};

McPrice price_mc(const MarketSpec& market, const Payoff& payoff, std::size_t npaths,
                 std::uint64_t seed, const McOptions& opts = {});
/// Several payoffs on one set of simulated terminal prices.
std::vector<McPrice> price_mc(const MarketSpec& market, const std::vector<Payoff>& payoffs,
                              std::size_t npaths, std::uint64_t seed, const McOptions& opts = {});

/// Discounted MC mean of S_i(T), for the martingale check.
McPrice discounted_stock_mc(const MarketSpec& market, std::size_t asset, std::size_t npaths,
                            std::uint64_t seed, const McOptions& opts = {});

/// Log-price grid x_i = log(S_i / S0_i) in [-half_width, half_width],
/// shifted so the strike of a call or put sits on a node.
struct PideGridSpec {
  double half_width = 4.0;
  int nodes = 801;
  /// 0 picks the smallest stable number of steps, at least min_steps.
  int steps = 0;
  int min_steps = 100;
  PdieOptions pdie;
};

struct PidePrice {
  double price = 0.0;
  std::shared_ptr<const GridSolution> solution;  // undiscounted theta in log coordinates
  Vector S0;
  double r = 0.0;
  double T = 1.0;
  int steps = 0;

  /// V(t, S) = e^{-r(T - t)} theta(t, log(S / S0)).
  double value(double t, std::span<const double> S) const;
};

PidePrice price_pide(const MarketSpec& market, const Payoff& payoff, const PideGridSpec& grid = {});

}  // namespace levybsde
