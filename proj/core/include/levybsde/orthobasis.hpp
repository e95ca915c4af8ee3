#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "levybsde/levy_model.hpp"
#include "levybsde/multi_index.hpp"

namespace levybsde {

/// Per-unit-time brackets <Y^p, Y^q> = m_{p+q} (+ sigma_ij on the degree-1
/// block), rows and columns in graded lex order for 1 <= |p| <= D.
Matrix gram_matrix(const LevyModel& model, int max_degree);

struct GramSchmidtResult {
  /// Row k holds the coefficients of H^{p_k} on Y^{p_0..p_k}; monic, so
  /// coeffs(k, k) == 1. Rows of pruned indices hold the residual anyway.
  Matrix coeffs;
  Vector norms2;
  std::vector<bool> kept;
};

/// Monic Gram-Schmidt in the given order. An index is pruned when its
/// residual norm^2 falls below tol times the largest Gram diagonal among
/// indices of the same group (degree). Later projections skip pruned
/// indices.
GramSchmidtResult gram_schmidt(const Matrix& gram, const std::vector<int>& groups,
                               double tol = 1e-12);
/// Single group.
GramSchmidtResult gram_schmidt(const Matrix& gram, double tol = 1e-12);

/// Monic orthogonal Teugels basis with its polynomial and martingale views.
class OrthoBasis {
 public:
  OrthoBasis(const LevyModel& model, int max_degree, double tol = 1e-12);
  /// From a precomputed Gram matrix; mean_drift is E[X(1)].
  OrthoBasis(std::size_t n, int max_degree, const Matrix& gram, Vector mean_drift,
             double tol = 1e-12);

  std::size_t dimension() const noexcept { return n_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<MultiIndex>& order() const noexcept { return order_; }
  const MultiIndex& index(std::size_t k) const { return order_.at(k); }
  /// Position of p in order(); throws if absent.
  std::size_t position(const MultiIndex& p) const;

  bool kept(std::size_t k) const { return gs_.kept.at(k); }
  std::vector<std::size_t> kept_positions() const;
  std::size_t kept_count() const;

  const Matrix& gram() const noexcept { return gram_; }
  const Matrix& coefficients() const noexcept { return gs_.coeffs; }
  const Vector& norms2() const noexcept { return gs_.norms2; }
  /// m_q for every q in order() of degree >= 2 (NaN for degree 1).
  double moment(std::size_t k) const { return moments_.at(k); }
  const Vector& mean_drift() const noexcept { return mean_drift_; }

  /// n x n lower-triangular matrix C with H^{e_i} = sum_j C_ij Y^{e_j}.
  Matrix degree1_matrix() const;
  /// C^{-1}; throws DegeneracyError when a degree-1 direction was pruned.
  Matrix degree1_inverse() const;
  /// R with Y^{e_i} = sum_j R_ij H^{e_j} in L^2; pruned columns are zero.
  /// Equals degree1_inverse() when nothing was pruned.
  Matrix degree1_projection() const;

  /// p^p(x): full monic polynomial.
  double evaluate_polynomial(std::size_t k, std::span<const double> x) const;
  /// p~^p(x): degree-1 terms other than the leading one dropped.
  double evaluate_ptilde(std::size_t k, std::span<const double> x) const;
  /// Unchecked variants, usable on pruned indices.
  double polynomial_raw(std::size_t k, std::span<const double> x) const;
  double ptilde_raw(std::size_t k, std::span<const double> x) const;

  /// sum_{|q| >= 2} c_q m_q: compensator rate of the p~ jump sum.
  double ptilde_compensator(std::size_t k) const { return ptilde_comp_.at(k); }

 private:
  void build(double tol);
  void require_kept(std::size_t k) const;

  std::size_t n_;
  int max_degree_;
  std::vector<MultiIndex> order_;
  Matrix gram_;
  Vector mean_drift_;
  GramSchmidtResult gs_;
  std::vector<double> moments_;
  std::vector<double> ptilde_comp_;
};

/// Largest relative residual, in the Gram inner product, of projecting each
/// row of a onto the span of the rows of b. Zero when span(a) is inside
/// span(b).
double span_residual(const Matrix& gram, const Matrix& a, const Matrix& b);

}  // namespace levybsde
