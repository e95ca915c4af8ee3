#include "levybsde/jump_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levybsde/error.hpp"
#include "levybsde/measure.hpp"
#include "levybsde/quadrature.hpp"

namespace levybsde {

TailTable::TailTable(const std::function<double(double)>& density, double xmin, double xmax,
                     double cell_ratio) {
  if (!(xmin > 0.0 && xmax > xmin)) throw ArgumentError("tail table needs 0 < xmin < xmax");
  if (!(cell_ratio > 1.0)) throw ArgumentError("cell ratio must exceed 1");
  const double step = std::log(cell_ratio);
  const auto cells =
      static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(xmax / xmin) / step)));
  x_.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) x_[k] = xmin * std::exp(step * static_cast<double>(k));
  x_.back() = xmax;
  u_.assign(cells + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t k = cells; k-- > 0;) {
    const auto r = integrate_panel(density, x_[k], x_[k + 1], 1e-13, 4);
    acc += r.value;
    u_[k] = static_cast<double>(acc);
  }
  slope_.assign(cells, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < cells; ++k) {
    if (u_[k + 1] > 0.0 && u_[k] > u_[k + 1])
      slope_[k] = std::log(u_[k] / u_[k + 1]) / std::log(x_[k + 1] / x_[k]);
  }
}

double TailTable::tail(double x) const {
  if (x >= x_.back()) return 0.0;
  if (x < x_.front()) {
    const double s = std::isfinite(slope_[0]) ? slope_[0] : 1.0;
    return u_[0] * std::pow(x_.front() / x, s);
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  if (std::isfinite(slope_[k])) return u_[k] * std::pow(x / x_[k], -slope_[k]);
  const double f = (x - x_[k]) / (x_[k + 1] - x_[k]);
  return u_[k] + f * (u_[k + 1] - u_[k]);
}

double TailTable::inverse(double u) const {
  if (!(u > 0.0)) return x_.back();
  if (u >= u_[0]) {
    const double s = std::isfinite(slope_[0]) ? slope_[0] : 1.0;
    return x_.front() * std::pow(u_[0] / u, 1.0 / s);
  }
  // u_ is nonincreasing; find k with u_[k] > u >= u_[k+1].
  const auto it = std::upper_bound(u_.begin(), u_.end(), u, std::greater<double>());
  const auto k = static_cast<std::size_t>(it - u_.begin()) - 1;
  if (k + 1 >= u_.size()) return x_.back();
  if (std::isfinite(slope_[k])) return x_[k] * std::pow(u_[k] / u, 1.0 / slope_[k]);
  const double f = (u_[k] - u) / (u_[k] - u_[k + 1]);
  return x_[k] + f * (x_[k + 1] - x_[k]);
}

// ---------------------------------------------------------------------------

namespace {

struct Marginal {
  std::unique_ptr<TailTable> pos;
  std::unique_ptr<TailTable> neg;
  double mass_pos = 0.0;  // nu([eps, inf))
  double mass_neg = 0.0;  // nu((-inf, -eps])

  double total() const { return mass_pos + mass_neg; }

  double sample(CounterRng& rng) const {
    const double u = rng.uniform() * total();
    if (u < mass_pos) return pos->inverse(mass_pos * rng.uniform());
    return -neg->inverse(mass_neg * rng.uniform());
  }
  double tail(double x) const { return x > 0.0 ? pos->tail(x) : -neg->tail(-x); }
  double inverse(double u) const { return u > 0.0 ? pos->inverse(u) : -neg->inverse(-u); }
};

double explicit_radius(const std::function<double(double)>& d, double start) {
  double x = std::max(1.0, start);
  while (x < 1e8 && x * d(x) > 1e-25) x *= 2.0;
  return x;
}

}  // namespace

struct JumpSampler::Impl {
  enum class Mode { None, Line, Copula2, Discrete };
  Mode mode = Mode::None;

  std::vector<double> atom_cum;
  std::vector<Vector> atom_x;
  double atom_rate = 0.0;

  Marginal line;            // Mode::Line
  Marginal m1, m2;          // Mode::Copula2
  ClaytonCopulaParams cop;
  double eps = 0.0;

  std::vector<double> disc_cum;  // Mode::Discrete
  std::vector<double> disc_points;

  double cont_rate = 0.0;
};

JumpSampler::~JumpSampler() = default;
JumpSampler::JumpSampler(JumpSampler&&) noexcept = default;
JumpSampler& JumpSampler::operator=(JumpSampler&&) noexcept = default;

JumpSampler::JumpSampler(const LevyModel& model, double eps)
    : n_(model.dimension()), eps_(eps), impl_(std::make_unique<Impl>()) {
  if (!(eps > 0.0)) throw ArgumentError("truncation eps must be positive");
  auto& im = *impl_;
  im.eps = eps;
  trunc_mean_ = Vector::Zero(static_cast<Eigen::Index>(n_));

  long double acc = 0.0L;
  for (const auto& a : model.atoms()) {
    if (a.intensity <= 0.0) continue;
    acc += a.intensity;
    im.atom_cum.push_back(static_cast<double>(acc));
    im.atom_x.push_back(a.x);
    trunc_mean_ += a.intensity * a.x;
  }
  im.atom_rate = static_cast<double>(acc);
  jump_rate_ = im.atom_rate;

  if (model.has_continuous_part()) {
    const double inf = std::numeric_limits<double>::infinity();
    if (n_ == 1) {
      im.mode = Impl::Mode::Line;
      std::function<double(double)> d;
      double lo = -inf;
      double hi = inf;
      double R = 0.0;
      if (model.copula_part()) {
        const auto p = model.copula_part()->marginals[0];
        d = [p](double x) { return meixner_levy_density(x, p); };
        R = meixner_support_radius(p);
      } else {
        const auto& ed = *model.density_part();
        lo = ed.lower[0];
        hi = ed.upper[0];
        d = [&model](double x) { return model.continuous_density(std::span<const double>(&x, 1)); };
      }
      auto build = [&](double sign, double a, double b, std::unique_ptr<TailTable>& table,
                       double& mass) {
        // Side covers sign * [a, b] with a >= eps.
        auto ds = [d, sign](double y) { return d(sign * y); };
        if (!(b > a)) return;
        if (std::isinf(b)) b = R > 0.0 ? R : explicit_radius(ds, a);
        table = std::make_unique<TailTable>(ds, a, b);
        mass = table->tail(a);
      };
      if (hi > eps) build(1.0, std::max(lo, eps), hi, im.line.pos, im.line.mass_pos);
      if (lo < -eps) build(-1.0, std::max(-hi, eps), -lo, im.line.neg, im.line.mass_neg);
      im.cont_rate = im.line.total();
      jump_rate_ += im.cont_rate;
      auto g = [&](double x) { return x * d(x); };
      IntegralResult pos;
      IntegralResult neg;
      if (hi > eps) pos = integrate_line(g, std::max(lo, eps), hi);
      if (lo < -eps) neg = integrate_line(g, lo, std::min(hi, -eps));
      if (!pos.converged || !neg.converged)
        throw NumericalError("truncated jump mean: " +
                             (pos.converged ? neg.diagnostic : pos.diagnostic));
      trunc_mean_[0] += pos.value + neg.value;
    } else if (n_ == 2 && model.copula_part()) {
      im.mode = Impl::Mode::Copula2;
      const auto& cj = *model.copula_part();
      im.cop = cj.copula;
      const double xmin = std::min(1e-12, eps);
      auto build = [&](const MeixnerParams& p, Marginal& m) {
        const double R = meixner_support_radius(p);
        m.pos = std::make_unique<TailTable>([p](double y) { return meixner_levy_density(y, p); },
                                            xmin, R);
        m.neg = std::make_unique<TailTable>([p](double y) { return meixner_levy_density(-y, p); },
                                            xmin, R);
        m.mass_pos = m.pos->tail(eps);
        m.mass_neg = m.neg->tail(eps);
      };
      build(cj.marginals[0], im.m1);
      build(cj.marginals[1], im.m2);
      im.cont_rate = im.m1.total() + im.m2.total();

      // Truncated mean and accepted rate on a discretization whose panels
      // break at +-eps, so the truncation indicator is resolved exactly.
      std::vector<std::vector<double>> bps;
      for (std::size_t i = 0; i < 2; ++i) {
        auto b = default_breakpoints(model, i);
        b.push_back(eps);
        b.push_back(-eps);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        bps.push_back(std::move(b));
      }
      const auto dm = discretize_continuous(model, bps, 8);
      double accepted = 0.0;
      for (std::size_t k = 0; k < dm.size(); ++k) {
        const auto x = dm.point(k);
        if (std::max(std::abs(x[0]), std::abs(x[1])) < eps) continue;
        accepted += dm.weight(k);
        trunc_mean_[0] += dm.weight(k) * x[0];
        trunc_mean_[1] += dm.weight(k) * x[1];
      }
      jump_rate_ += accepted;
    } else {
      im.mode = Impl::Mode::Discrete;
      const auto& dm = model.discretization();
      long double c = 0.0L;
      for (std::size_t k = 0; k < dm.size(); ++k) {
        const auto x = dm.point(k);
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        if (m < eps) continue;
        c += dm.weight(k);
        im.disc_cum.push_back(static_cast<double>(c));
        im.disc_points.insert(im.disc_points.end(), x.begin(), x.end());
        for (std::size_t i = 0; i < n_; ++i)
          trunc_mean_[static_cast<Eigen::Index>(i)] += dm.weight(k) * x[i];
      }
      im.cont_rate = static_cast<double>(c);
      jump_rate_ += im.cont_rate;
    }
  }
  rate_ = im.atom_rate + im.cont_rate;
}

bool JumpSampler::sample(CounterRng& rng, double* out) const {
  const auto& im = *impl_;
  double u = rng.uniform() * rate_;
  if (u < im.atom_rate) {
    const auto it = std::upper_bound(im.atom_cum.begin(), im.atom_cum.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - im.atom_cum.begin()),
                                         im.atom_x.size() - 1);
    for (std::size_t i = 0; i < n_; ++i) out[i] = im.atom_x[k][static_cast<Eigen::Index>(i)];
    return true;
  }
  u -= im.atom_rate;
  switch (im.mode) {
    case Impl::Mode::Line:
      out[0] = im.line.sample(rng);
      return true;
    case Impl::Mode::Copula2: {
      if (u < im.m1.total()) {
        const double x1 = im.m1.sample(rng);
        const double u2 = clayton_conditional_inverse(rng.uniform(), im.m1.tail(x1), im.cop);
        out[0] = x1;
        out[1] = im.m2.inverse(u2);
        return true;
      }
      // Second coordinate drives; keep only jumps not already produced by
      // the first branch.
      const double x2 = im.m2.sample(rng);
      const double u1 = clayton_conditional_inverse(rng.uniform(), im.m2.tail(x2), im.cop);
      const double x1 = im.m1.inverse(u1);
      if (std::abs(x1) >= im.eps) return false;
      out[0] = x1;
      out[1] = x2;
      return true;
    }
    case Impl::Mode::Discrete: {
      const auto it = std::upper_bound(im.disc_cum.begin(), im.disc_cum.end(), u);
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - im.disc_cum.begin()),
                                           im.disc_cum.size() - 1);
      for (std::size_t i = 0; i < n_; ++i) out[i] = im.disc_points[k * n_ + i];
      return true;
    }
    case Impl::Mode::None:
      break;
  }
  return false;
}

}  // namespace levybsde
