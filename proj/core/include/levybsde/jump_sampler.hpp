#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "levybsde/levy_model.hpp"
#include "levybsde/rng.hpp"

namespace levybsde {

/// Tabulated one-sided tail integral U(x) = int_x^inf d(y) dy on
/// log-spaced cells over [xmin, xmax]. Inside a cell U is interpolated as
/// a power law, which is exact for the small-jump asymptotics x^{-s}.
class TailTable {
 public:
  TailTable(const std::function<double(double)>& density, double xmin, double xmax,
            double cell_ratio = 1.005);

  double xmin() const noexcept { return x_.front(); }
  double xmax() const noexcept { return x_.back(); }
  /// U(x); power-law extrapolation below xmin, 0 above xmax.
  double tail(double x) const;
  /// x with U(x) = u for u > 0; extrapolates above U(xmin).
  double inverse(double u) const;

 private:
  std::vector<double> x_;
  std::vector<double> u_;
  std::vector<double> slope_;  // local exponent s with U ~ x^{-s}
};

/// Draws jumps of the truncated measure nu restricted to {||x||_inf >= eps}
/// plus all atoms. Some proposals are rejected (thinning), so sample()
/// reports whether a jump was produced.
class JumpSampler {
 public:
  JumpSampler(const LevyModel& model, double eps);
  ~JumpSampler();
  JumpSampler(JumpSampler&&) noexcept;
  JumpSampler& operator=(JumpSampler&&) noexcept;

  std::size_t dimension() const noexcept { return n_; }
  double eps() const noexcept { return eps_; }
  /// Total proposal intensity.
  double proposal_rate() const noexcept { return rate_; }
  /// Intensity of accepted jumps: nu({||x||_inf >= eps}) + atom mass.
  double jump_rate() const noexcept { return jump_rate_; }
  /// int over the simulated jump set of y nu(dy).
  const Vector& truncated_mean() const noexcept { return trunc_mean_; }

  bool sample(CounterRng& rng, double* out) const;

 private:
  struct Impl;
  std::size_t n_ = 0;
  double eps_ = 0.0;
  double rate_ = 0.0;
  double jump_rate_ = 0.0;
  Vector trunc_mean_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace levybsde
