#include "levybsde/orthobasis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "levybsde/error.hpp"

namespace levybsde {

namespace {

using LVec = std::vector<long double>;

// Kahan-compensated long double dot product.
long double dot(const LVec& a, const LVec& b) {
  long double s = 0.0L;
  long double c = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double y = a[i] * b[i] - c;
    const long double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

LVec times(const std::vector<LVec>& g, const LVec& v) {
  LVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = dot(g[i], v);
  return out;
}

}  // namespace

Matrix gram_matrix(const LevyModel& model, int max_degree) {
  if (max_degree < 1) throw ArgumentError("max degree must be at least 1");
  const auto order = graded_lex_enumerate(model.dimension(), max_degree);
  const auto N = static_cast<Eigen::Index>(order.size());
  std::unordered_map<MultiIndex, double, MultiIndexHash> cache;
  Matrix g(N, N);
  for (Eigen::Index a = 0; a < N; ++a) {
    for (Eigen::Index b = a; b < N; ++b) {
      const MultiIndex s = order[a] + order[b];
      auto it = cache.find(s);
      if (it == cache.end()) it = cache.emplace(s, moment(model, s)).first;
      double v = it->second;
      if (order[a].degree() == 1 && order[b].degree() == 1)
        v += model.sigma()(static_cast<Eigen::Index>(order[a].unit_position()),
                           static_cast<Eigen::Index>(order[b].unit_position()));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return g;
}

GramSchmidtResult gram_schmidt(const Matrix& gram, const std::vector<int>& groups, double tol) {
  const auto N = static_cast<std::size_t>(gram.rows());
  if (gram.cols() != gram.rows()) throw ArgumentError("Gram matrix must be square");
  if (groups.size() != N) throw ArgumentError("one group label per Gram row");
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, gram.cwiseAbs().maxCoeff()))
    throw ArgumentError("Gram matrix must be symmetric");

  std::vector<LVec> g(N, LVec(N));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      g[i][j] = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  std::unordered_map<int, double> group_scale;
  for (std::size_t i = 0; i < N; ++i) {
    double& s = group_scale[groups[i]];
    s = std::max(s, std::abs(gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  }

  GramSchmidtResult out;
  out.coeffs = Matrix::Zero(gram.rows(), gram.cols());
  out.norms2 = Vector::Zero(gram.rows());
  out.kept.assign(N, false);
  std::vector<LVec> h(N);
  std::vector<LVec> gh(N);
  std::vector<long double> n2(N, 0.0L);

  for (std::size_t k = 0; k < N; ++k) {
    LVec v(N, 0.0L);
    v[k] = 1.0L;
    for (std::size_t j = 0; j < k; ++j) {
      if (!out.kept[j]) continue;
      const long double proj = dot(v, gh[j]) / n2[j];
      if (proj == 0.0L) continue;
      for (std::size_t i = 0; i <= j; ++i) v[i] -= proj * h[j][i];
    }
    v[k] = 1.0L;
    LVec gv = times(g, v);
    const long double norm2 = dot(v, gv);
    const double scale = group_scale[groups[k]];
    if (norm2 < -static_cast<long double>(tol) * scale && norm2 < -1e-300L)
      throw NumericalError("Gram matrix is not positive semidefinite (residual norm^2 " +
                           std::to_string(static_cast<double>(norm2)) + ")");
    out.kept[k] = scale > 0.0 && norm2 >= static_cast<long double>(tol) * scale;
    n2[k] = norm2;
    out.norms2[static_cast<Eigen::Index>(k)] = static_cast<double>(norm2);
    for (std::size_t i = 0; i < N; ++i)
      out.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          static_cast<double>(v[i]);
    h[k] = std::move(v);
    gh[k] = std::move(gv);
  }
  return out;
}

GramSchmidtResult gram_schmidt(const Matrix& gram, double tol) {
  return gram_schmidt(gram, std::vector<int>(static_cast<std::size_t>(gram.rows()), 0), tol);
}

OrthoBasis::OrthoBasis(const LevyModel& model, int max_degree, double tol)
    : n_(model.dimension()),
      max_degree_(max_degree),
      order_(graded_lex_enumerate(model.dimension(), max_degree)),
      gram_(gram_matrix(model, max_degree)),
      mean_drift_(compensator_mean(model)) {
  build(tol);
}

OrthoBasis::OrthoBasis(std::size_t n, int max_degree, const Matrix& gram, Vector mean_drift,
                       double tol)
    : n_(n),
      max_degree_(max_degree),
      order_(graded_lex_enumerate(n, max_degree)),
      gram_(gram),
      mean_drift_(std::move(mean_drift)) {
  if (gram_.rows() != static_cast<Eigen::Index>(order_.size()))
    throw ArgumentError("Gram size does not match the index set");
  if (mean_drift_.size() != static_cast<Eigen::Index>(n_))
    throw ArgumentError("mean drift dimension mismatch");
  build(tol);
}

void OrthoBasis::build(double tol) {
  std::vector<int> degrees;
  for (const auto& p : order_) degrees.push_back(p.degree());
  gs_ = gram_schmidt(gram_, degrees, tol);

  const std::size_t N = order_.size();
  moments_.assign(N, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < N; ++k) {
    const auto& q = order_[k];
    if (q.degree() < 2) continue;
    std::size_t i = 0;
    while (q[i] == 0) ++i;
    std::vector<int> rest = q.parts();
    --rest[i];
    moments_[k] = gram_(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(position(MultiIndex(rest))));
  }
  ptilde_comp_.assign(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    long double s = 0.0L;
    for (std::size_t j = 0; j <= k; ++j)
      if (order_[j].degree() >= 2)
        s += static_cast<long double>(gs_.coeffs(static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(j))) *
             moments_[j];
    ptilde_comp_[k] = static_cast<double>(s);
  }
}

std::size_t OrthoBasis::position(const MultiIndex& p) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), p, GradedLexLess{});
  if (it == order_.end() || !(*it == p))
    throw ArgumentError("multi-index " + p.to_string() + " is not in the basis");
  return static_cast<std::size_t>(it - order_.begin());
}

std::vector<std::size_t> OrthoBasis::kept_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < order_.size(); ++k)
    if (gs_.kept[k]) out.push_back(k);
  return out;
}

std::size_t OrthoBasis::kept_count() const {
  return static_cast<std::size_t>(std::count(gs_.kept.begin(), gs_.kept.end(), true));
}

Matrix OrthoBasis::degree1_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_);
  return gs_.coeffs.topLeftCorner(n, n);
}

Matrix OrthoBasis::degree1_inverse() const {
  for (std::size_t i = 0; i < n_; ++i)
    if (!gs_.kept[i])
      throw DegeneracyError("degree-1 direction " + order_[i].to_string() +
                            " was pruned; the jump components are linearly dependent");
  const Matrix c = degree1_matrix();
  return c.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_)));
}

Matrix OrthoBasis::degree1_projection() const {
  const auto n = static_cast<Eigen::Index>(n_);
  const Matrix g1 = gram_.topLeftCorner(n, n);
  Matrix r = g1 * degree1_matrix().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (gs_.kept[static_cast<std::size_t>(j)]) {
      r.col(j) /= gs_.norms2[j];
    } else {
      r.col(j).setZero();
    }
  }
  return r;
}

void OrthoBasis::require_kept(std::size_t k) const {
  if (k >= order_.size()) throw ArgumentError("basis position out of range");
  if (!gs_.kept[k])
    throw DegeneracyError("basis index " + order_[k].to_string() + " was pruned");
}

double OrthoBasis::polynomial_raw(std::size_t k, std::span<const double> x) const {
  if (x.size() != n_) throw ArgumentError("point dimension mismatch");
  long double s = 0.0L;
  for (std::size_t j = 0; j <= k; ++j) {
    const double c = gs_.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    if (c != 0.0) s += static_cast<long double>(c) * order_[j].monomial(x);
  }
  return static_cast<double>(s);
}

double OrthoBasis::ptilde_raw(std::size_t k, std::span<const double> x) const {
  if (x.size() != n_) throw ArgumentError("point dimension mismatch");
  long double s = 0.0L;
  for (std::size_t j = 0; j <= k; ++j) {
    if (order_[j].degree() == 1 && j != k) continue;
    const double c = gs_.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    if (c != 0.0) s += static_cast<long double>(c) * order_[j].monomial(x);
  }
  return static_cast<double>(s);
}

double OrthoBasis::evaluate_polynomial(std::size_t k, std::span<const double> x) const {
  require_kept(k);
  return polynomial_raw(k, x);
}

double OrthoBasis::evaluate_ptilde(std::size_t k, std::span<const double> x) const {
  require_kept(k);
  return ptilde_raw(k, x);
}

double span_residual(const Matrix& gram, const Matrix& a, const Matrix& b) {
  if (a.rows() == 0) return 0.0;
  if (b.rows() == 0) return 1.0;
  const Matrix gbb = b * gram * b.transpose();
  const Matrix gba = b * gram * a.transpose();
  const Matrix coef = gbb.ldlt().solve(gba);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const Vector diff = a.row(r).transpose() - b.transpose() * coef.col(r);
    const double num = diff.dot(gram * diff);
    const double den = a.row(r).dot(gram * a.row(r).transpose());
    if (den > 0.0) worst = std::max(worst, std::sqrt(std::max(num, 0.0) / den));
  }
  return worst;
}

}  // namespace levybsde
