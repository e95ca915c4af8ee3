#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "levybsde/levy_model.hpp"
#include "levybsde/quadrature.hpp"

namespace levybsde {

/// Weighted point set approximating a continuous Lévy measure:
/// int f dnu ~ sum_i w_i f(x_i).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::size_t n) : n_(n) {}

  void add(std::span<const double> x, double weight);
  void reserve(std::size_t count);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * n_, n_};
  }
  double weight(std::size_t i) const { return weights_[i]; }

  double integrate(const std::function<double(std::span<const double>)>& f) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> points_;
  std::vector<double> weights_;
};

using JumpFunction = std::function<double(std::span<const double>)>;

/// Tensor-product composite rule for the continuous part of `model`. One
/// list of breakpoints per coordinate; order is the per-panel
/// Gauss-Legendre order.
DiscreteMeasure discretize_continuous(
    const LevyModel& model, const std::vector<std::vector<double>>& breakpoints,
    int order);

/// Breakpoints used by the cached model discretization for coordinate i.
std::vector<double> default_breakpoints(const LevyModel& model, std::size_t i);

/// int_lower^upper g(x) dx. Finite pieces away from 0 use one adaptive
/// panel, pieces touching 0 use inward dyadic shells (g may be singular
/// there), infinite bounds use outward shells.
IntegralResult integrate_line(const std::function<double(double)>& g, double lower,
                              double upper, const QuadratureOptions& opts = {});

/// Radius beyond which the marginal tail mass is below `tail_tol`.
double meixner_support_radius(const MeixnerParams& p, double tail_tol = 1e-30);

/// int f dnu over atoms and continuous part. One-dimensional continuous
/// parts use adaptive dyadic shells; higher dimensions use the cached
/// discretization.
IntegralResult integrate_jumps(const LevyModel& model, const JumpFunction& f,
                               const QuadratureOptions& opts = {});

/// Same, continuous part only.
IntegralResult integrate_continuous(const LevyModel& model, const JumpFunction& f,
                                    const QuadratureOptions& opts = {});

}  // namespace levybsde
