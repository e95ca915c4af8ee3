#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "levybsde/multi_index.hpp"

namespace levybsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct MeixnerParams {
  double alpha = 1.0;  // scale, > 0
  double beta = 0.0;   // skew, in (-pi, pi)
  double delta = 1.0;  // shape, > 0
  double mu = 0.0;     // location; drift bookkeeping only

  void validate() const;
};

struct PoissonUnitJump {
  double intensity = 1.0;
};

/// One-dimensional marginal Lévy measure: a Meixner density or a single
/// unit atom of the given intensity.
struct MarginalMeasure {
  std::variant<MeixnerParams, PoissonUnitJump> kind;

  static MarginalMeasure meixner(const MeixnerParams& p) { return {p}; }
  static MarginalMeasure poisson(double intensity) {
    return {PoissonUnitJump{intensity}};
  }

  bool is_continuous() const {
    return std::holds_alternative<MeixnerParams>(kind);
  }
  /// nu(dx)/dx; throws for the atomic kind.
  double density(double x) const;
};

struct ClaytonCopulaParams {
  double mu = 1.0;   // dependence strength, > 0
  double eta = 1.0;  // sign-dependence mix, in [0, 1]

  void validate() const;
};

struct Atom {
  Vector x;
  double intensity = 0.0;
};

/// Continuous jump density supplied by the caller on a box. In one
/// dimension the bounds may be infinite; in higher dimensions the box must
/// be finite.
struct ExplicitDensity {
  std::function<double(std::span<const double>)> density;
  Vector lower;
  Vector upper;
};

/// Meixner marginals coupled by a Clayton Lévy copula. With one marginal
/// the copula is ignored.
struct CopulaJumps {
  std::vector<MeixnerParams> marginals;
  ClaytonCopulaParams copula;
};

class DiscreteMeasure;

/// Lévy-Khintchine triple (a, Sigma, nu) with nu given as atoms, a
/// continuous part, or both. Immutable after construction.
class LevyModel {
 public:
  static LevyModel pure_drift(Vector drift, Matrix sigma = Matrix());
  static LevyModel atomic(Vector drift, std::vector<Atom> atoms,
                          Matrix sigma = Matrix());
  static LevyModel meixner(const MeixnerParams& params, double drift = 0.0);
  static LevyModel copula(Vector drift, std::vector<MeixnerParams> marginals,
                          const ClaytonCopulaParams& copula,
                          Matrix sigma = Matrix());
  /// Poisson marginals are only accepted in one dimension (they become a
  /// unit atom); multidimensional Poisson dependence goes through
  /// common_poisson_measure.
  static LevyModel from_marginals(Vector drift,
                                  const std::vector<MarginalMeasure>& marginals,
                                  std::optional<ClaytonCopulaParams> copula,
                                  Matrix sigma = Matrix());
  static LevyModel with_density(Vector drift, ExplicitDensity density,
                                Matrix sigma = Matrix());

  LevyModel with_drift(Vector drift) const;
  LevyModel with_sigma(Matrix sigma) const;
  /// Adds atoms to the jump measure (mixed model).
  LevyModel with_atoms(std::vector<Atom> atoms) const;

  std::size_t dimension() const noexcept { return n_; }
  const Vector& drift() const noexcept { return drift_; }
  const Matrix& sigma() const noexcept { return sigma_; }
  bool has_brownian_part() const;

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::optional<CopulaJumps>& copula_part() const noexcept {
    return copula_;
  }
  const std::optional<ExplicitDensity>& density_part() const noexcept {
    return density_;
  }
  bool has_continuous_part() const noexcept {
    return copula_.has_value() || density_.has_value();
  }
  bool has_jumps() const noexcept {
    return has_continuous_part() || !atoms_.empty();
  }

  /// Density of the continuous part at x (all x_i nonzero for copula
  /// models). Zero outside the support.
  double continuous_density(std::span<const double> x) const;

  /// Cached tensor-product discretization of the continuous part, used
  /// for integrals in two or more dimensions.
  const DiscreteMeasure& discretization() const;

 private:
  LevyModel() = default;
  void validate();

  std::size_t n_ = 0;
  Vector drift_;
  Matrix sigma_;
  std::vector<Atom> atoms_;
  std::optional<CopulaJumps> copula_;
  std::optional<ExplicitDensity> density_;

  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// --- Meixner marginal -----------------------------------------------------

/// delta * exp(beta x / alpha) / (x sinh(pi x / alpha)); x == 0 is a
/// DomainError.
double meixner_levy_density(double x, const MeixnerParams& params);

/// Cumulant K(theta) = mu theta + 2 delta (log cos(beta/2) -
/// log cos((alpha theta + beta)/2)); requires |alpha theta + beta| < pi.
double meixner_cumulant(double theta, const MeixnerParams& params);

/// Closed-form K''(0) = alpha^2 delta / (1 + cos beta).
double meixner_second_cumulant(const MeixnerParams& params);

// --- Clayton Lévy copula --------------------------------------------------

/// F(u) = 2^{2-n} (sum |u_j|^{-mu})^{-1/mu} (eta 1{prod u >= 0} -
/// (1 - eta) 1{prod u < 0}). Any u_j == 0 gives 0.
double clayton_copula(std::span<const double> u, const ClaytonCopulaParams& params);

/// Mixed partial d_1...d_n F at u (all u_j nonzero).
double clayton_copula_mixed_partial(std::span<const double> u,
                                    const ClaytonCopulaParams& params);

/// Inverse of the conditional distribution u2 -> (1-eta) + dF/du1(u1,u2)
/// (u1 > 0) or eta + dF/du1(u1,u2) (u1 < 0), for two dimensions. v in (0,1).
double clayton_conditional_inverse(double v, double u1,
                                   const ClaytonCopulaParams& params);

// --- Measure-level operations ---------------------------------------------

/// U(x) = nu([x, inf)) for x > 0, -nu((-inf, x]) for x < 0.
double tail_integral(const MarginalMeasure& m, double x, double tol = 1e-12);

/// Joint density of a copula model by differentiation of the copula at the
/// marginal tail integrals.
double joint_levy_density(std::span<const double> x, const LevyModel& model);

/// Atomic model with a single atom at (1,1) carrying the Clayton-Poisson
/// common-jump intensity, and drift (-lambda1, -lambda2).
LevyModel common_poisson_measure(double lambda1, double lambda2,
                                 const ClaytonCopulaParams& params);

/// Intensity of the common (1,1) atom used by common_poisson_measure.
double common_poisson_intensity(double lambda1, double lambda2,
                                const ClaytonCopulaParams& params);

/// Same common atom plus axis atoms (1,0), (0,1) carrying the leftover
/// marginal intensities lambda_i - c, so each coordinate is Poisson(lambda_i).
/// Drift (-lambda1, -lambda2) compensates both coordinates.
LevyModel poisson_copula_with_margins(double lambda1, double lambda2,
                                      const ClaytonCopulaParams& params);

double moment(const LevyModel& model, const MultiIndex& p, double tol = 1e-10);
std::vector<double> moments(const LevyModel& model,
                            const std::vector<MultiIndex>& indices,
                            double tol = 1e-10);

/// int ||y|| nu(dy) < inf, so that first moments m_p, |p| = 1, exist.
/// Meixner marginals never qualify.
bool has_finite_variation(const LevyModel& model);

struct Hypothesis1Report {
  bool holds = false;
  double value = 0.0;  // truncated exponential moment when finite
  std::string diagnostic;
};

/// Numerical check of int_{|x| >= eps} exp(lambda |x|) nu(dx) < inf.
Hypothesis1Report check_hypothesis1(const LevyModel& model, double eps = 0.1,
                                    double lambda = 1.0);

/// a~ = a + int_{|y| >= 1} y nu(dy).
Vector compensator_mean(const LevyModel& model);

/// Drift a_j = -sigma_jj / 2 - int (e^{z_j} - 1 - z_j 1{|z| <= 1}) nu(dz).
Vector risk_neutral_drift(const LevyModel& model);

/// int (e^{z_j} - 1 - z_j 1{|z| <= 1}) nu(dz) for each j.
Vector exponential_compensator(const LevyModel& model);

}  // namespace levybsde
