#pragma once

#include <string>

#include "config.hpp"

namespace levybsde::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kFailure = 3 };

int cmd_moments(const RunConfig& cfg);
int cmd_orthobasis(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
/// which: linear-pdie, nonlinear-pdie or bsde.
int cmd_solve(const RunConfig& cfg, const std::string& which);
/// method: mc or pide.
int cmd_price(const RunConfig& cfg, const std::string& method);
int cmd_verify(const RunConfig& cfg);

/// Pricing market with the risk-neutral drift applied when requested.
MarketSpec make_market(const RunConfig& cfg);

/// Runs solve with the configured step count, or with the smallest stable
/// count (at least 100) when steps is 0.
template <class Solve>
auto with_stable_steps(int steps, Solve&& solve) -> decltype(solve(1));

}  // namespace levybsde::cli

#include "levybsde/error.hpp"

template <class Solve>
auto levybsde::cli::with_stable_steps(int steps, Solve&& solve) -> decltype(solve(1)) {
  if (steps > 0) return solve(steps);
  try {
    return solve(100);
  } catch (const StepSizeError& e) {
    return solve(e.suggested_steps());
  }
}
