#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "levybsde/driver.hpp"
#include "levybsde/grid.hpp"
#include "levybsde/levy_model.hpp"
#include "levybsde/orthobasis.hpp"
#include "levybsde/simulator.hpp"

namespace levybsde {

/// Nonlocal part of the generator on a space grid. The continuous measure
/// is lumped onto cells of size h centered at grid multiples; each cell
/// becomes one jump to its center with a weight that preserves the cell's
/// second moment, and the central cell becomes a diffusion term. Atoms are
/// kept exactly.
struct JumpStencil {
  std::size_t n = 1;
  std::vector<double> y;        // physical jump, n per entry
  std::vector<double> offset;   // jump in grid units, n per entry
  std::vector<char> integral;   // offset is an integer vector
  std::vector<double> weight;
  Matrix small_cov;             // int_{cell 0} y y^T nu
  Vector lumped_mean;           // sum_j w_j y_j
  double total_rate = 0.0;      // sum_j w_j

  /// Entry j, basis position q: int_cell |y|^2 y^q nu / |y_j|^2 (cells)
  /// or intensity * y^q (atoms). Only filled when max_degree >= 1.
  Matrix entry_moments;
  /// int_{cell 0} y^s nu for 2 <= |s| <= max_degree + 2.
  std::unordered_map<MultiIndex, double, MultiIndexHash> cell0_moments;
  int max_degree = 0;

  std::size_t size() const noexcept { return weight.size(); }
};

/// tail_tol: relative size of the discarded far tail of |y|^2 nu.
JumpStencil build_stencil(const LevyModel& model, const SpaceGrid& grid, int max_degree = 0,
                          double tail_tol = 1e-10);

struct PdieGrid {
  SpaceGrid space;
  TimeGrid time;
};

struct PdieOptions {
  /// Skip the explicit-step stability check.
  bool cfl_override = false;
  /// Evaluate the driver on the new slice by fixed-point iteration.
  bool implicit_driver = false;
  int max_fixed_point = 50;
  double fixed_point_tol = 1e-10;
  double tail_tol = 1e-10;
  /// Moment tables kept with the solution for representation
  /// coefficients up to this degree (at least the driver basis degree).
  int basis_degree = 2;
  int threads = 0;
};

using TerminalFunction = std::function<double(std::span<const double>)>;

/// theta_k(t_j, x) on every node for j = 0..N and k = 0..m-1.
class GridSolution {
 public:
  GridSolution(PdieGrid grid, std::size_t components, std::shared_ptr<const JumpStencil> stencil,
               std::shared_ptr<const OrthoBasis> basis);

  const SpaceGrid& space() const noexcept { return grid_.space; }
  const TimeGrid& time() const noexcept { return grid_.time; }
  std::size_t components() const noexcept { return m_; }
  const JumpStencil& stencil() const { return *stencil_; }
  const std::shared_ptr<const OrthoBasis>& basis() const noexcept { return basis_; }

  /// Node values of component k at time index j.
  std::span<double> slice(int j, std::size_t k);
  std::span<const double> slice(int j, std::size_t k) const;

  /// Interpolated in space (multilinear) and time (linear).
  double value(std::size_t k, double t, std::span<const double> x) const;
  Vector gradient(std::size_t k, double t, std::span<const double> x) const;

 private:
  int time_index(double t, double& frac) const;

  PdieGrid grid_;
  std::size_t m_;
  std::shared_ptr<const JumpStencil> stencil_;
  std::shared_ptr<const OrthoBasis> basis_;
  std::vector<std::vector<double>> data_;  // [(j * m + k)] -> node values
};

GridSolution solve_linear_pdie(const LevyModel& model, const std::vector<TerminalFunction>& g,
                               const PdieGrid& grid, const PdieOptions& opts = {});

/// Explicit (or fixed-point) driver; with a zero driver the result matches
/// solve_linear_pdie bit for bit. basis may be null when the driver does
/// not use z.
GridSolution solve_nonlinear_pdie(const LevyModel& model, const std::vector<TerminalFunction>& g,
                                  const DriverFunction& f, std::shared_ptr<const OrthoBasis> basis,
                                  const PdieGrid& grid, const PdieOptions& opts = {});

/// theta(t, x + y) - theta(t, x) - grad theta(t, x) . y
double theta1(const GridSolution& sol, std::size_t k, double t, std::span<const double> x,
              std::span<const double> y);

struct CoefficientTable {
  std::vector<std::size_t> positions;  // kept basis positions
  Vector monic;                        // coefficient of H^p
  Vector orthonormal;                  // coefficient of H^p / ||H^p||
};

/// Representation coefficients of theta_k(T, X(T)) at (t, x), lumped the
/// same way as the solver's jump operator.
CoefficientTable clark_ocone_coefficients(const GridSolution& sol, const OrthoBasis& basis,
                                          std::size_t k, double t, std::span<const double> x);

/// Same, with the lumping tables built once for repeated evaluation. Holds
/// references to sol and basis.
class CoefficientEvaluator {
 public:
  CoefficientEvaluator(const GridSolution& sol, const OrthoBasis& basis);
  ~CoefficientEvaluator();
  CoefficientEvaluator(CoefficientEvaluator&&) noexcept;

  CoefficientTable operator()(std::size_t k, double t, std::span<const double> x) const;
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Largest explicit step allowed by the jump part.
double max_stable_step(const JumpStencil& stencil);

}  // namespace levybsde
