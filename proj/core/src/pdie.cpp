#include "levybsde/pdie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/SparseLU>

#include "levybsde/error.hpp"
#include "levybsde/measure.hpp"
#include "levybsde/parallel.hpp"

namespace levybsde {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

void push_entry(JumpStencil& s, std::span<const double> y, const SpaceGrid& grid, double w,
                const std::vector<double>& moments) {
  bool integral = true;
  for (std::size_t i = 0; i < s.n; ++i) {
    double off = y[i] / grid.h(i);
    if (near_integer(off)) {
      off = std::round(off);
    } else {
      integral = false;
    }
    s.y.push_back(y[i]);
    s.offset.push_back(off);
  }
  s.integral.push_back(integral ? 1 : 0);
  s.weight.push_back(w);
  if (!moments.empty()) {
    const auto row = static_cast<Eigen::Index>(s.weight.size() - 1);
    if (s.entry_moments.rows() <= row) s.entry_moments.conservativeResize(row + 64, Eigen::NoChange);
    for (std::size_t q = 0; q < moments.size(); ++q)
      s.entry_moments(row, static_cast<Eigen::Index>(q)) = moments[q];
  }
}

// Continuous part in one dimension: adaptive quadrature cell by cell.
void stencil_line(JumpStencil& s, const LevyModel& model, const SpaceGrid& grid,
                  const std::vector<MultiIndex>& order, double tail_tol) {
  const double h = grid.h(0);
  std::function<double(double)> d;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double R = 0.0;
  if (model.copula_part()) {
    const auto p = model.copula_part()->marginals[0];
    d = [p](double x) { return meixner_levy_density(x, p); };
    R = meixner_support_radius(p, tail_tol);
  } else {
    lo = model.density_part()->lower[0];
    hi = model.density_part()->upper[0];
    d = [&model](double x) { return model.continuous_density(std::span<const double>(&x, 1)); };
    R = std::max(std::abs(lo), std::abs(hi));
    if (!std::isfinite(R)) {
      R = 1.0;
      while (R < 1e6 && R * R * d(std::isfinite(hi) ? -R : R) > tail_tol * 1e-3) R *= 2.0;
    }
  }
  const long J = static_cast<long>(std::ceil(R / h - 0.5));
  const GaussLegendre& gl = gauss_legendre(20);
  for (long j = -J; j <= J; ++j) {
    if (j == 0) continue;
    const double yj = static_cast<double>(j) * h;
    const double a = std::max(lo, yj - 0.5 * h);
    const double b = std::min(hi, yj + 0.5 * h);
    if (!(b > a)) continue;
    // Cells avoid the origin, so y^2 nu is smooth on each: one 20-point rule.
    double w2 = 0.0;
    std::vector<double> mom(order.size(), 0.0);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double y = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
      const double w = 0.5 * (b - a) * gl.weights[q] * y * y * d(y);
      w2 += w;
      for (std::size_t e = 0; e < order.size(); ++e) mom[e] += w * std::pow(y, order[e][0]);
    }
    if (!(w2 > 0.0)) continue;
    for (auto& v : mom) v /= yj * yj;
    push_entry(s, std::span<const double>(&yj, 1), grid, w2 / (yj * yj), mom);
  }
  const double a0 = std::max(lo, -0.5 * h);
  const double b0 = std::min(hi, 0.5 * h);
  for (int e = 2; e <= s.max_degree + 2; ++e) {
    const auto r = integrate_line([&](double y) { return std::pow(y, e) * d(y); }, a0, b0);
    if (!r.converged) throw NumericalError("central-cell moment: " + r.diagnostic);
    s.cell0_moments[MultiIndex{e}] = r.value;
  }
  s.small_cov(0, 0) = s.cell0_moments.at(MultiIndex{2});
}

// Continuous part in n >= 2: bin the cached discretization into cells.
void stencil_binned(JumpStencil& s, const LevyModel& model, const SpaceGrid& grid,
                    const std::vector<MultiIndex>& order, double tail_tol) {
  const std::size_t n = s.n;
  const auto& dm = model.discretization();
  struct Cell {
    double w2 = 0.0;
    std::vector<double> mom;
  };
  std::map<std::vector<long>, Cell> cells;
  std::vector<MultiIndex> raw;
  for (int d = 2; d <= s.max_degree + 2; ++d)
    for (auto& q : indices_of_degree(n, d)) raw.push_back(q);
  std::vector<long double> raw_acc(raw.size(), 0.0L);
  double total = 0.0;
  std::vector<long> key(n);
  for (std::size_t k = 0; k < dm.size(); ++k) {
    const auto x = dm.point(k);
    const double w = dm.weight(k);
    bool centre = true;
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      key[i] = std::lround(x[i] / grid.h(i));
      centre = centre && key[i] == 0;
      r2 += x[i] * x[i];
    }
    total += w * r2;
    if (centre) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          s.small_cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w * x[a] * x[b];
      for (std::size_t q = 0; q < raw.size(); ++q) raw_acc[q] += w * raw[q].monomial(x);
      continue;
    }
    auto& c = cells[key];
    c.w2 += w * r2;
    if (c.mom.empty()) c.mom.assign(order.size(), 0.0);
    for (std::size_t q = 0; q < order.size(); ++q) c.mom[q] += w * r2 * order[q].monomial(x);
  }
  for (std::size_t q = 0; q < raw.size(); ++q) s.cell0_moments[raw[q]] = static_cast<double>(raw_acc[q]);
  std::vector<double> y(n);
  for (auto& [k, c] : cells) {
    if (c.w2 <= tail_tol * 1e-6 * total) continue;
    double yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<double>(k[i]) * grid.h(i);
      yy += y[i] * y[i];
    }
    for (auto& v : c.mom) v /= yy;
    push_entry(s, y, grid, c.w2 / yy, c.mom);
  }
}

}  // namespace

JumpStencil build_stencil(const LevyModel& model, const SpaceGrid& grid, int max_degree,
                          double tail_tol) {
  const std::size_t n = model.dimension();
  if (grid.dimension() != n) throw ArgumentError("grid and model dimensions differ");
  JumpStencil s;
  s.n = n;
  s.max_degree = std::max(max_degree, 0);
  s.small_cov = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto order = s.max_degree >= 1 ? graded_lex_enumerate(n, s.max_degree) : std::vector<MultiIndex>{};
  s.entry_moments = Matrix::Zero(0, static_cast<Eigen::Index>(order.size()));

  for (const auto& a : model.atoms()) {
    if (a.intensity <= 0.0) continue;
    std::vector<double> mom;
    const std::span<const double> x(a.x.data(), n);
    for (const auto& q : order) mom.push_back(a.intensity * q.monomial(x));
    push_entry(s, x, grid, a.intensity, mom);
  }
  if (model.has_continuous_part()) {
    if (n == 1) {
      stencil_line(s, model, grid, order, tail_tol);
    } else {
      stencil_binned(s, model, grid, order, tail_tol);
    }
  }
  s.entry_moments.conservativeResize(static_cast<Eigen::Index>(s.size()), Eigen::NoChange);
  s.lumped_mean = Vector::Zero(static_cast<Eigen::Index>(n));
  long double rate = 0.0L;
  for (std::size_t j = 0; j < s.size(); ++j) {
    rate += s.weight[j];
    for (std::size_t i = 0; i < n; ++i)
      s.lumped_mean[static_cast<Eigen::Index>(i)] += s.weight[j] * s.y[j * n + i];
  }
  s.total_rate = static_cast<double>(rate);
  return s;
}

double max_stable_step(const JumpStencil& stencil) {
  return stencil.total_rate > 0.0 ? 1.0 / (2.0 * stencil.total_rate)
                                  : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------

GridSolution::GridSolution(PdieGrid grid, std::size_t components,
                           std::shared_ptr<const JumpStencil> stencil,
                           std::shared_ptr<const OrthoBasis> basis)
    : grid_(std::move(grid)), m_(components), stencil_(std::move(stencil)), basis_(std::move(basis)) {
  data_.assign(static_cast<std::size_t>(grid_.time.N + 1) * m_,
               std::vector<double>(grid_.space.size(), 0.0));
}

std::span<double> GridSolution::slice(int j, std::size_t k) {
  return data_.at(static_cast<std::size_t>(j) * m_ + k);
}

std::span<const double> GridSolution::slice(int j, std::size_t k) const {
  return data_.at(static_cast<std::size_t>(j) * m_ + k);
}

int GridSolution::time_index(double t, double& frac) const {
  const double s = std::clamp(t / grid_.time.dt(), 0.0, static_cast<double>(grid_.time.N));
  int j = static_cast<int>(std::floor(s));
  if (j >= grid_.time.N) j = grid_.time.N - 1;
  frac = s - j;
  return j;
}

double GridSolution::value(std::size_t k, double t, std::span<const double> x) const {
  double frac = 0.0;
  const int j = time_index(t, frac);
  const double a = grid_.space.interpolate(slice(j, k).data(), x);
  if (frac == 0.0) return a;
  const double b = grid_.space.interpolate(slice(j + 1, k).data(), x);
  return a + frac * (b - a);
}

Vector GridSolution::gradient(std::size_t k, double t, std::span<const double> x) const {
  double frac = 0.0;
  const int j = time_index(t, frac);
  const Vector a = grid_.space.gradient(slice(j, k).data(), x);
  if (frac == 0.0) return a;
  const Vector b = grid_.space.gradient(slice(j + 1, k).data(), x);
  return a + frac * (b - a);
}

// ---------------------------------------------------------------------------

namespace {

// Precomputed lumping of <theta^(1), p^p>_nu for the kept basis indices.
struct CoefficientEngine {
  std::vector<std::size_t> kept;
  Matrix omega;               // entries x K
  std::vector<Matrix> quad;   // K matrices n x n acting on the Hessian
  Vector sqrt_norm;
  Matrix projection;          // degree-1 R
  std::vector<int> degree;

  CoefficientEngine(const JumpStencil& s, const OrthoBasis& b) : kept(b.kept_positions()) {
    if (b.dimension() != s.n) throw ArgumentError("basis and stencil dimensions differ");
    if (b.max_degree() > s.max_degree)
      throw ArgumentError("stencil was built for a lower basis degree");
    const auto K = static_cast<Eigen::Index>(kept.size());
    const auto N = static_cast<Eigen::Index>(b.size());
    const auto n = static_cast<Eigen::Index>(s.n);
    Matrix coef(K, N);
    for (Eigen::Index r = 0; r < K; ++r)
      coef.row(r) = b.coefficients().row(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(r)]));
    omega = s.entry_moments.leftCols(N) * coef.transpose();
    sqrt_norm.resize(K);
    for (Eigen::Index r = 0; r < K; ++r) {
      const auto k = static_cast<Eigen::Index>(kept[static_cast<std::size_t>(r)]);
      sqrt_norm[r] = std::sqrt(b.norms2()[k]);
      degree.push_back(b.index(static_cast<std::size_t>(k)).degree());
      Matrix B = Matrix::Zero(n, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index c = 0; c < n; ++c) {
          double acc = 0.0;
          const MultiIndex eac = MultiIndex::unit(s.n, static_cast<std::size_t>(a)) +
                                 MultiIndex::unit(s.n, static_cast<std::size_t>(c));
          for (Eigen::Index q = 0; q <= k; ++q) {
            const double cq = b.coefficients()(k, q);
            if (cq == 0.0) continue;
            const auto it = s.cell0_moments.find(eac + b.index(static_cast<std::size_t>(q)));
            if (it != s.cell0_moments.end()) acc += cq * it->second;
          }
          B(a, c) = 0.5 * static_cast<double>(acc);
        }
      }
      quad.push_back(std::move(B));
    }
    projection = b.degree1_projection();
  }

  // theta1[j] = theta(x + y_j) - theta(x) - grad . y_j
  void compute(const std::vector<double>& theta1, const Vector& grad, const Matrix& hess,
               CoefficientTable& out) const {
    const auto K = static_cast<Eigen::Index>(kept.size());
    out.positions = kept;
    out.monic.resize(K);
    out.orthonormal.resize(K);
    const Eigen::Map<const Vector> t1(theta1.data(), static_cast<Eigen::Index>(theta1.size()));
    const Vector integral = omega.transpose() * t1;
    for (Eigen::Index r = 0; r < K; ++r) {
      const double I = integral[r] + (hess.cwiseProduct(quad[static_cast<std::size_t>(r)])).sum();
      const double N = sqrt_norm[r] * sqrt_norm[r];
      double monic = I / N;
      if (degree[static_cast<std::size_t>(r)] == 1) {
        const auto p = static_cast<Eigen::Index>(kept[static_cast<std::size_t>(r)]);
        monic += grad.dot(projection.col(p));
      }
      out.monic[r] = monic;
      out.orthonormal[r] = monic * sqrt_norm[r];
    }
  }
};

SpMat implicit_operator(const SpaceGrid& grid, const Vector& b, const Matrix& A, double dt) {
  const std::size_t n = grid.dimension();
  const std::size_t M = grid.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(M * (1 + 4 * n + 4 * n * n));
  std::vector<long> idx(n);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t f = 0; f < M; ++f) {
    grid.unflatten(f, idx.data());
    row.clear();
    auto add = [&row](std::size_t col, double v) { row.emplace_back(col, v); };
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const long k = idx[i];
      const long last = grid.axis(i).nodes - 1;
      const std::size_t s = grid.stride(i);
      const double h = grid.h(i);
      const double bi = b[ii];
      if (bi != 0.0) {
        // Backward equation: the characteristic x + b(T - t) comes from the
        // side b points to.
        const long dir = bi > 0.0 ? 1 : -1;
        const long room = dir > 0 ? last - k : k;
        const double sb = std::abs(bi);
        auto nb = [&](long steps) {
          return dir > 0 ? f + static_cast<std::size_t>(steps) * s : f - static_cast<std::size_t>(steps) * s;
        };
        if (room >= 2) {
          add(nb(1), sb * 4.0 / (2.0 * h));
          add(nb(2), -sb * 1.0 / (2.0 * h));
        } else if (room == 1) {
          add(nb(1), sb / h);
        } else {
          // Boundary node facing outward: one-sided difference from inside.
          const std::size_t in = dir > 0 ? f - s : f + s;
          add(in, -sb / h);
        }
      }
      const double aii = A(ii, ii);
      if (aii != 0.0 && k > 0 && k < last) {
        add(f + s, 0.5 * aii / (h * h));
        add(f - s, 0.5 * aii / (h * h));
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        const double aij = A(ii, static_cast<Eigen::Index>(j));
        if (aij == 0.0) continue;
        const long kj = idx[j];
        if (k == 0 || k == last || kj == 0 || kj == grid.axis(j).nodes - 1) continue;
        const std::size_t sj = grid.stride(j);
        const double c = aij / (4.0 * h * grid.h(j));
        add(f + s + sj, c);
        add(f - s - sj, c);
        add(f + s - sj, -c);
        add(f - s + sj, -c);
      }
    }
    double diag = 0.0;
    for (const auto& [col, v] : row) {
      diag -= v;
      trip.emplace_back(static_cast<int>(f), static_cast<int>(col), -dt * v);
    }
    trip.emplace_back(static_cast<int>(f), static_cast<int>(f), 1.0 - dt * diag);
  }
  SpMat m(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// sum_j w_j (theta(x + y_j) - theta(x)) at every node.
void jump_term(const SpaceGrid& grid, const JumpStencil& s, const double* theta, double* out,
               int threads) {
  const std::size_t n = grid.dimension();
  const std::size_t M = grid.size();
  const std::size_t E = s.size();
  if (E == 0) {
    std::fill(out, out + M, 0.0);
    return;
  }
  bool all_integral = std::all_of(s.integral.begin(), s.integral.end(), [](char c) { return c != 0; });
  if (n == 1 && all_integral) {
    std::vector<long> off(E);
    for (std::size_t j = 0; j < E; ++j) off[j] = std::lround(s.offset[j]);
    const long last = static_cast<long>(M) - 1;
    long pad = 0;
    for (long o : off) pad = std::max(pad, std::abs(o));
    // Field padded by linear extrapolation on both sides.
    std::vector<double> ext(M + 2 * static_cast<std::size_t>(pad));
    const double left = theta[1] - theta[0];
    const double right = theta[last] - theta[last - 1];
    for (long k = -pad; k <= last + pad; ++k) {
      double v;
      if (k < 0) {
        v = theta[0] + static_cast<double>(k) * left;
      } else if (k > last) {
        v = theta[last] + static_cast<double>(k - last) * right;
      } else {
        v = theta[k];
      }
      ext[static_cast<std::size_t>(k + pad)] = v;
    }
    parallel_for(M, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t f = b; f < e; ++f) {
        const double base = theta[f];
        const double* row = ext.data() + f + static_cast<std::size_t>(pad);
        double acc = 0.0;
        for (std::size_t j = 0; j < E; ++j) acc += s.weight[j] * (row[off[j]] - base);
        out[f] = acc;
      }
    });
    return;
  }
  parallel_for(M, threads, [&](std::size_t b, std::size_t e) {
    std::vector<long> idx(n);
    std::vector<long> sh(n);
    std::vector<double> x(n);
    for (std::size_t f = b; f < e; ++f) {
      grid.unflatten(f, idx.data());
      const double base = theta[f];
      double acc = 0.0;
      for (std::size_t j = 0; j < E; ++j) {
        double v;
        if (s.integral[j]) {
          for (std::size_t i = 0; i < n; ++i) sh[i] = idx[i] + std::lround(s.offset[j * n + i]);
          v = grid.at(theta, sh.data());
        } else {
          for (std::size_t i = 0; i < n; ++i) x[i] = grid.coordinate(i, idx[i]) + s.y[j * n + i];
          v = grid.interpolate(theta, x);
        }
        acc += s.weight[j] * (v - base);
      }
      out[f] = acc;
    }
  });
}

// theta(x + y_j) - theta(x) - grad . y_j at a node, for all entries.
void node_theta1(const SpaceGrid& grid, const JumpStencil& s, const double* theta, std::size_t f,
                 const Vector& grad, std::vector<double>& out) {
  const std::size_t n = grid.dimension();
  std::vector<long> idx(n);
  std::vector<long> sh(n);
  std::vector<double> x(n);
  grid.unflatten(f, idx.data());
  out.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    double v;
    if (s.integral[j]) {
      for (std::size_t i = 0; i < n; ++i) sh[i] = idx[i] + std::lround(s.offset[j * n + i]);
      v = grid.at(theta, sh.data());
    } else {
      for (std::size_t i = 0; i < n; ++i) x[i] = grid.coordinate(i, idx[i]) + s.y[j * n + i];
      v = grid.interpolate(theta, x);
    }
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) lin += grad[static_cast<Eigen::Index>(i)] * s.y[j * n + i];
    out[j] = v - theta[f] - lin;
  }
}

GridSolution solve_impl(const LevyModel& model, const std::vector<TerminalFunction>& g,
                        const DriverFunction* f, std::shared_ptr<const OrthoBasis> basis,
                        const PdieGrid& grid, const PdieOptions& opts) {
  const std::size_t n = model.dimension();
  if (grid.space.dimension() != n) throw ArgumentError("grid and model dimensions differ");
  if (g.empty()) throw ArgumentError("need at least one terminal function");
  const bool need_z = f && !f->is_zero() && f->uses_z;
  if (need_z && !basis) throw ArgumentError("a z-dependent driver needs a basis");
  const int degree = std::max(opts.basis_degree, basis ? basis->max_degree() : 0);
  auto stencil = std::make_shared<const JumpStencil>(build_stencil(model, grid.space, degree, opts.tail_tol));

  const double dt = grid.time.dt();
  const double limit = max_stable_step(*stencil);
  if (!opts.cfl_override && dt > limit) {
    const int steps = static_cast<int>(std::ceil(grid.time.T / limit));
    throw StepSizeError("explicit jump step dt = " + std::to_string(dt) + " exceeds the bound " +
                            std::to_string(limit) + "; use at least " + std::to_string(steps) +
                            " time steps",
                        steps);
  }

  const Vector drift = compensator_mean(model) - stencil->lumped_mean;
  const Matrix A = stencil->small_cov + model.sigma();
  const SpMat op = implicit_operator(grid.space, drift, A, dt);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(op);
  if (lu.info() != Eigen::Success) throw NumericalError("implicit operator factorization failed");

  const std::size_t m = g.size();
  const std::size_t M = grid.space.size();
  GridSolution sol(grid, m, stencil, basis);
  for (std::size_t f0 = 0; f0 < M; ++f0) {
    const Vector x = grid.space.node(f0);
    for (std::size_t k = 0; k < m; ++k)
      sol.slice(grid.time.N, k)[f0] = g[k](std::span<const double>(x.data(), n));
  }

  std::unique_ptr<CoefficientEngine> engine;
  if (need_z) engine = std::make_unique<CoefficientEngine>(*stencil, *basis);
  const auto K = static_cast<Eigen::Index>(engine ? engine->kept.size() : 0);

  std::vector<std::vector<double>> jump(m, std::vector<double>(M));
  std::vector<std::vector<double>> drive(m, std::vector<double>(M, 0.0));
  Vector rhs(static_cast<Eigen::Index>(M));

  // Driver values at time t from the fields cur[k].
  auto eval_driver = [&](double t, const std::vector<const double*>& cur) {
    parallel_for(M, opts.threads, [&](std::size_t b, std::size_t e) {
      Vector y(static_cast<Eigen::Index>(m));
      Matrix z(static_cast<Eigen::Index>(m), K);
      std::vector<double> t1;
      CoefficientTable tab;
      for (std::size_t node = b; node < e; ++node) {
        for (std::size_t k = 0; k < m; ++k) {
          y[static_cast<Eigen::Index>(k)] = cur[k][node];
          if (engine) {
            const Vector grad = grid.space.node_gradient(cur[k], node);
            const Matrix hess = grid.space.node_hessian(cur[k], node);
            node_theta1(grid.space, *stencil, cur[k], node, grad, t1);
            engine->compute(t1, grad, hess, tab);
            z.row(static_cast<Eigen::Index>(k)) = tab.orthonormal.transpose();
          }
        }
        const Vector fv = (*f)(t, y, z);
        for (std::size_t k = 0; k < m; ++k) drive[k][node] = fv[static_cast<Eigen::Index>(k)];
      }
    });
  };

  const bool driven = f && !f->is_zero();
  for (int j = grid.time.N - 1; j >= 0; --j) {
    std::vector<const double*> old(m);
    for (std::size_t k = 0; k < m; ++k) {
      old[k] = sol.slice(j + 1, k).data();
      jump_term(grid.space, *stencil, old[k], jump[k].data(), opts.threads);
    }
    if (driven) eval_driver(grid.time.t(j + 1), old);
    auto step = [&]() {
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t node = 0; node < M; ++node)
          rhs[static_cast<Eigen::Index>(node)] = old[k][node] + dt * (jump[k][node] + drive[k][node]);
        const Vector out = lu.solve(rhs);
        std::copy(out.data(), out.data() + M, sol.slice(j, k).data());
      }
    };
    step();
    if (driven && opts.implicit_driver) {
      int it = 0;
      for (;; ++it) {
        if (it >= opts.max_fixed_point)
          throw NumericalError("driver fixed-point iteration did not converge at t = " +
                               std::to_string(grid.time.t(j)));
        std::vector<std::vector<double>> prev(m);
        std::vector<const double*> cur(m);
        for (std::size_t k = 0; k < m; ++k) {
          auto sl = sol.slice(j, k);
          prev[k].assign(sl.begin(), sl.end());
          cur[k] = prev[k].data();
        }
        eval_driver(grid.time.t(j), cur);
        step();
        double change = 0.0;
        double scale = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
          auto sl = sol.slice(j, k);
          for (std::size_t node = 0; node < M; ++node) {
            change = std::max(change, std::abs(sl[node] - prev[k][node]));
            scale = std::max(scale, std::abs(sl[node]));
          }
        }
        if (change <= opts.fixed_point_tol * scale) break;
      }
    }
  }
  return sol;
}

}  // namespace

GridSolution solve_linear_pdie(const LevyModel& model, const std::vector<TerminalFunction>& g,
                               const PdieGrid& grid, const PdieOptions& opts) {
  return solve_impl(model, g, nullptr, nullptr, grid, opts);
}

GridSolution solve_nonlinear_pdie(const LevyModel& model, const std::vector<TerminalFunction>& g,
                                  const DriverFunction& f, std::shared_ptr<const OrthoBasis> basis,
                                  const PdieGrid& grid, const PdieOptions& opts) {
  return solve_impl(model, g, &f, std::move(basis), grid, opts);
}

double theta1(const GridSolution& sol, std::size_t k, double t, std::span<const double> x,
              std::span<const double> y) {
  if (x.size() != y.size() || x.size() != sol.space().dimension())
    throw ArgumentError("theta1: dimension mismatch");
  std::vector<double> xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xy[i] = x[i] + y[i];
  const Vector grad = sol.gradient(k, t, x);
  double lin = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) lin += grad[static_cast<Eigen::Index>(i)] * y[i];
  return sol.value(k, t, xy) - sol.value(k, t, x) - lin;
}

struct CoefficientEvaluator::Impl {
  const GridSolution& sol;
  CoefficientEngine engine;
};

CoefficientEvaluator::CoefficientEvaluator(const GridSolution& sol, const OrthoBasis& basis) {
  if (sol.stencil().max_degree < basis.max_degree())
    throw ArgumentError("solution stencil was built for a lower basis degree; solve with a basis "
                        "of at least this degree");
  impl_ = std::make_unique<Impl>(Impl{sol, CoefficientEngine(sol.stencil(), basis)});
}

CoefficientEvaluator::~CoefficientEvaluator() = default;
CoefficientEvaluator::CoefficientEvaluator(CoefficientEvaluator&&) noexcept = default;

std::size_t CoefficientEvaluator::size() const { return impl_->engine.kept.size(); }

CoefficientTable CoefficientEvaluator::operator()(std::size_t k, double t,
                                                  std::span<const double> x) const {
  const GridSolution& sol = impl_->sol;
  const JumpStencil& st = sol.stencil();
  const std::size_t n = x.size();
  if (n != sol.space().dimension()) throw ArgumentError("point dimension mismatch");
  std::vector<double> t1(st.size());
  const Vector grad = sol.gradient(k, t, x);
  const double base = sol.value(k, t, x);
  std::vector<double> xy(n);
  for (std::size_t j = 0; j < st.size(); ++j) {
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xy[i] = x[i] + st.y[j * n + i];
      lin += grad[static_cast<Eigen::Index>(i)] * st.y[j * n + i];
    }
    t1[j] = sol.value(k, t, xy) - base - lin;
  }
  Matrix hess = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (st.small_cov.cwiseAbs().maxCoeff() > 0.0) {
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t b = 0; b < n; ++b) {
      const double h = sol.space().h(b);
      xp[b] = x[b] + h;
      const Vector up = sol.gradient(k, t, xp);
      xp[b] = x[b] - h;
      const Vector dn = sol.gradient(k, t, xp);
      xp[b] = x[b];
      hess.col(static_cast<Eigen::Index>(b)) = (up - dn) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
  }
  CoefficientTable out;
  impl_->engine.compute(t1, grad, hess, out);
  return out;
}

CoefficientTable clark_ocone_coefficients(const GridSolution& sol, const OrthoBasis& basis,
                                          std::size_t k, double t, std::span<const double> x) {
  return CoefficientEvaluator(sol, basis)(k, t, x);
}

}  // namespace levybsde
