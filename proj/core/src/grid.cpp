#include "levybsde/grid.hpp"

#include <cmath>

#include "levybsde/error.hpp"

namespace levybsde {

SpaceGrid::SpaceGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ArgumentError("space grid needs at least one axis");
  for (const auto& a : axes_) {
    if (!(std::isfinite(a.lower) && std::isfinite(a.upper) && a.lower < a.upper))
      throw ArgumentError("grid bounds must be finite with lower < upper");
    if (a.nodes < 3) throw ArgumentError("grid axes need at least 3 nodes");
  }
  const std::size_t n = axes_.size();
  strides_.assign(n, 1);
  for (std::size_t i = n - 1; i-- > 0;)
    strides_[i] = strides_[i + 1] * static_cast<std::size_t>(axes_[i + 1].nodes);
  size_ = strides_[0] * static_cast<std::size_t>(axes_[0].nodes);
}

void SpaceGrid::unflatten(std::size_t flat, long* idx) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    idx[i] = static_cast<long>(flat / strides_[i]);
    flat %= strides_[i];
  }
}

std::size_t SpaceGrid::flatten(const long* idx) const {
  std::size_t f = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) f += static_cast<std::size_t>(idx[i]) * strides_[i];
  return f;
}

Vector SpaceGrid::node(std::size_t flat) const {
  const std::size_t n = axes_.size();
  std::vector<long> idx(n);
  unflatten(flat, idx.data());
  Vector x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) x[static_cast<Eigen::Index>(i)] = coordinate(i, idx[i]);
  return x;
}

double SpaceGrid::at_rec(const double* field, long* idx, std::size_t from) const {
  for (std::size_t d = from; d < axes_.size(); ++d) {
    const long k = idx[d];
    const long last = axes_[d].nodes - 1;
    if (k >= 0 && k <= last) continue;
    // theta(k) = theta(b) + (k - b) (theta(b) - theta(b -+ 1)) from the edge b.
    const long b = k < 0 ? 0 : last;
    const long nb = k < 0 ? 1 : last - 1;
    idx[d] = b;
    const double vb = at_rec(field, idx, d + 1);
    idx[d] = nb;
    const double vn = at_rec(field, idx, d + 1);
    idx[d] = k;
    const double steps = static_cast<double>(k < 0 ? -k : k - last);
    return vb + steps * (vb - vn);
  }
  return field[flatten(idx)];
}

double SpaceGrid::at(const double* field, const long* idx) const {
  long buf[8];
  std::vector<long> big(axes_.size() > 8 ? axes_.size() : 0);
  long* w = axes_.size() > 8 ? big.data() : buf;
  for (std::size_t i = 0; i < axes_.size(); ++i) w[i] = idx[i];
  return at_rec(field, w, 0);
}

double SpaceGrid::interpolate(const double* field, std::span<const double> x) const {
  const std::size_t n = axes_.size();
  if (x.size() != n) throw ArgumentError("point dimension mismatch");
  long base[8];
  double frac[8];
  if (n > 8) throw ArgumentError("interpolation supports up to 8 dimensions");
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (x[i] - axes_[i].lower) / h(i);
    const double fl = std::floor(s);
    base[i] = static_cast<long>(fl);
    frac[i] = s - fl;
  }
  double sum = 0.0;
  long idx[8];
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (corner >> i) & 1U;
      w *= up ? frac[i] : 1.0 - frac[i];
      idx[i] = base[i] + (up ? 1 : 0);
    }
    if (w != 0.0) sum += w * at(field, idx);
  }
  return sum;
}

Vector SpaceGrid::gradient(const double* field, std::span<const double> x) const {
  const std::size_t n = axes_.size();
  Vector g(static_cast<Eigen::Index>(n));
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = h(i);
    xp[i] = x[i] + hi;
    const double up = interpolate(field, xp);
    xp[i] = x[i] - hi;
    const double dn = interpolate(field, xp);
    xp[i] = x[i];
    g[static_cast<Eigen::Index>(i)] = (up - dn) / (2.0 * hi);
  }
  return g;
}

Vector SpaceGrid::node_gradient(const double* field, std::size_t flat) const {
  const std::size_t n = axes_.size();
  Vector g(static_cast<Eigen::Index>(n));
  std::vector<long> idx(n);
  unflatten(flat, idx.data());
  for (std::size_t i = 0; i < n; ++i) {
    const long k = idx[i];
    const long last = axes_[i].nodes - 1;
    const std::size_t s = strides_[i];
    double d = 0.0;
    if (k == 0) {
      d = (field[flat + s] - field[flat]) / h(i);
    } else if (k == last) {
      d = (field[flat] - field[flat - s]) / h(i);
    } else {
      d = (field[flat + s] - field[flat - s]) / (2.0 * h(i));
    }
    g[static_cast<Eigen::Index>(i)] = d;
  }
  return g;
}

Matrix SpaceGrid::node_hessian(const double* field, std::size_t flat) const {
  const std::size_t n = axes_.size();
  Matrix H = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<long> idx(n);
  unflatten(flat, idx.data());
  auto interior = [&](std::size_t i) { return idx[i] > 0 && idx[i] < axes_[i].nodes - 1; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!interior(i)) continue;
    const std::size_t si = strides_[i];
    const auto ii = static_cast<Eigen::Index>(i);
    H(ii, ii) = (field[flat + si] - 2.0 * field[flat] + field[flat - si]) / (h(i) * h(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!interior(j)) continue;
      const std::size_t sj = strides_[j];
      const double v = (field[flat + si + sj] - field[flat + si - sj] - field[flat - si + sj] +
                        field[flat - si - sj]) /
                       (4.0 * h(i) * h(j));
      H(ii, static_cast<Eigen::Index>(j)) = v;
      H(static_cast<Eigen::Index>(j), ii) = v;
    }
  }
  return H;
}

}  // namespace levybsde
