#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "levybsde/levy_model.hpp"

namespace levybsde {

struct Axis {
  double lower = -1.0;
  double upper = 1.0;
  int nodes = 3;

  double h() const noexcept { return (upper - lower) / (nodes - 1); }
};

/// Rectangular tensor grid with uniform spacing per axis. Nodes are stored
/// row-major with the last coordinate fastest.
class SpaceGrid {
 public:
  SpaceGrid() = default;
  explicit SpaceGrid(std::vector<Axis> axes);

  std::size_t dimension() const noexcept { return axes_.size(); }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  double h(std::size_t i) const { return axes_[i].h(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  double coordinate(std::size_t i, long k) const { return axes_[i].lower + h(i) * static_cast<double>(k); }
  void unflatten(std::size_t flat, long* idx) const;
  std::size_t flatten(const long* idx) const;
  Vector node(std::size_t flat) const;

  /// Field value at an integer multi-index, linearly extrapolated per axis
  /// outside the grid.
  double at(const double* field, const long* idx) const;
  /// Multilinear interpolation at x; linear extrapolation outside.
  double interpolate(const double* field, std::span<const double> x) const;
  /// Central-difference gradient of the interpolant with step h_i.
  Vector gradient(const double* field, std::span<const double> x) const;
  /// Gradient at a node: central inside, one-sided on the boundary.
  Vector node_gradient(const double* field, std::size_t flat) const;
  /// Hessian at a node by central differences; zero curvature across the
  /// boundary.
  Matrix node_hessian(const double* field, std::size_t flat) const;

 private:
  double at_rec(const double* field, long* idx, std::size_t from) const;

  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

}  // namespace levybsde
