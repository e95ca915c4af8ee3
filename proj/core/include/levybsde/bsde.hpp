#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "levybsde/driver.hpp"
#include "levybsde/orthobasis.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/simulator.hpp"

namespace levybsde {

/// Simulated states on a time grid together with the orthonormal Teugels
/// increments over each interval.
struct PathSet {
  std::size_t n = 1;
  std::size_t count = 0;
  std::size_t K = 0;  // kept basis directions
  int max_degree = 0; // basis degree
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::vector<std::size_t> positions;  // kept basis positions
  std::vector<int> degrees;            // |p| per kept direction
  std::vector<double> states;          // [path][k = 0..N][i]
  std::vector<double> increments;      // [path][k = 0..N-1][r]

  std::span<const double> state(std::size_t path, int k) const {
    return {states.data() + (path * static_cast<std::size_t>(grid.N + 1) + static_cast<std::size_t>(k)) * n, n};
  }
  std::span<const double> increment(std::size_t path, int k) const {
    return {increments.data() + (path * static_cast<std::size_t>(grid.N) + static_cast<std::size_t>(k)) * K, K};
  }
};

PathSet simulate_path_set(const Simulator& sim, const OrthoBasis& basis, const TimeGrid& grid,
                          std::size_t count, std::uint64_t seed, int threads = 0);

/// Terminal value xi = G(X(T)) and driver f.
struct BsdeData {
  DriverFunction driver;
  std::function<double(std::span<const double>)> terminal;
  /// Chaos truncation; directions with |p| > degree get z = 0. -1 keeps all.
  int degree = -1;
};

struct BsdeOptions {
  /// Total degree of the state polynomials in the regression basis.
  int regression_degree = 2;
  /// Add G(X(t_k)) itself as a regressor.
  bool payoff_regressor = true;
  int max_iterations = 25;
  double tolerance = 1e-4;
  /// Weight of the beta-norm; negative means 4 C^2 + 1 from the driver.
  double beta = -1.0;
  /// Drop collinear regressors instead of failing.
  bool allow_rank_deficient = true;
  int threads = 0;
};

struct BsdeSolution {
  TimeGrid grid;
  std::size_t paths = 0;
  std::size_t K = 0;
  std::vector<double> Y;  // [k = 0..N][path]
  std::vector<double> Z;  // [k = 0..N-1][path][r]
  int iterations = 0;
  std::vector<double> residuals;  // beta-norm distance per Picard step
  int dropped_regressors = 0;

  double y(int k, std::size_t path) const { return Y[static_cast<std::size_t>(k) * paths + path]; }
  double z(int k, std::size_t path, std::size_t r) const {
    return Z[(static_cast<std::size_t>(k) * paths + path) * K + r];
  }
  double& y(int k, std::size_t path) { return Y[static_cast<std::size_t>(k) * paths + path]; }
  double& z(int k, std::size_t path, std::size_t r) {
    return Z[(static_cast<std::size_t>(k) * paths + path) * K + r];
  }
  /// Y(t_k) mean and standard deviation over paths.
  double mean_y(int k) const;
  double sd_y(int k) const;
  double mean_z(int k, std::size_t r) const;

  static BsdeSolution zeros(const PathSet& paths);
};

/// Conditional expectations given X(t_k), with the least-squares systems
/// factored once per time step and shared across Picard iterations.
class Regressor {
 public:
  Regressor(const PathSet& paths, const BsdeData& data, const BsdeOptions& opts);
  /// Fitted values of E[v | X(t_k)] on every path.
  std::vector<double> project(int k, const std::vector<double>& v) const;
  int dropped() const noexcept { return dropped_; }

 private:
  struct Step;
  std::vector<std::shared_ptr<const Step>> steps_;
  int dropped_ = 0;
};

/// One application of the discrete Picard map to `current`.
BsdeSolution picard_iterate(const BsdeSolution& current, const BsdeData& data,
                            const PathSet& paths, const Regressor& reg,
                            const BsdeOptions& opts = {});
BsdeSolution picard_iterate(const BsdeSolution& current, const BsdeData& data,
                            const PathSet& paths, const BsdeOptions& opts = {});

/// Picard iteration from zero until the beta-norm step is below
/// tolerance * (1 + norm). Throws NumericalError with the residual trace
/// when max_iterations is exhausted.
BsdeSolution solve_bsde(const BsdeData& data, const PathSet& paths, const BsdeOptions& opts = {});

/// Iterates of the Picard map from zero, `count` applications.
std::vector<BsdeSolution> picard_sequence(const BsdeData& data, const PathSet& paths, int count,
                                          const BsdeOptions& opts = {});

/// sqrt(sum_k e^{beta t_k} (mean |dY_k|^2 + mean |dZ_k|^2) dt), k < N.
double beta_norm(const BsdeSolution& a, const BsdeSolution& b, double beta);

struct StabilityReport {
  double lhs = 0.0;  // E sum_k (|dY|^2 + |dZ|^2) dt
  double rhs = 0.0;  // E |dxi|^2 + E sum_k |df|^2 dt
};

StabilityReport stability_check(const BsdeData& a, const BsdeData& b, const PathSet& paths,
                                const BsdeOptions& opts = {});

struct Reconstruction {
  std::vector<double> value;  // reconstructed xi per path
  std::vector<double> target; // xi per path
  double rms_error = 0.0;
};

/// xi ~ Y(0) - sum_k f_k dt + sum_k sum_{|p| <= degree} z^p(t_k) dH~^p(t_k).
Reconstruction clark_ocone_reconstruct(const PathSet& paths, const BsdeSolution& sol,
                                       const BsdeData& data, int degree);

/// Linear case from a PDIE solution of component k:
/// xi ~ theta(0, X(0)) + sum_k sum_{|p| <= degree} z^p(t_k, X(t_k)) dH~^p(t_k).
Reconstruction clark_ocone_reconstruct(const PathSet& paths, const GridSolution& sol,
                                       const OrthoBasis& basis,
                                       const std::function<double(std::span<const double>)>& terminal,
                                       int degree, std::size_t component = 0, int threads = 0);

}  // namespace levybsde
