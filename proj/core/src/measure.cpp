#include "levybsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levybsde/error.hpp"

namespace levybsde {

void DiscreteMeasure::add(std::span<const double> x, double weight) {
  if (x.size() != n_) throw ArgumentError("point dimension mismatch");
  points_.insert(points_.end(), x.begin(), x.end());
  weights_.push_back(weight);
}

void DiscreteMeasure::reserve(std::size_t count) {
  points_.reserve(count * n_);
  weights_.reserve(count);
}

double DiscreteMeasure::integrate(
    const std::function<double(std::span<const double>)>& f) const {
  long double s = 0.0L;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    s += static_cast<long double>(weights_[i]) * f(point(i));
  return static_cast<double>(s);
}

namespace {

void accumulate(IntegralResult& into, const IntegralResult& r) {
  into.value += r.value;
  into.error += r.error;
  into.shells += r.shells;
  if (!r.converged) {
    into.converged = false;
    if (into.diagnostic.empty()) into.diagnostic = r.diagnostic;
  }
}

// int_a^b g for 0 <= a < b <= inf.
IntegralResult half_line(const std::function<double(double)>& g, double a, double b,
                         const QuadratureOptions& opts) {
  IntegralResult out;
  double c = a;
  if (a == 0.0) {
    c = std::min(b, 1.0);
    accumulate(out, integrate_inward(g, c, opts));
  }
  // Below 1 the outward shells of a 1/x-like integrand never shrink, so
  // cover [c, 1] with finite dyadic panels first.
  while (c < 1.0 && c < b) {
    const double d = std::min({2.0 * c, 1.0, b});
    accumulate(out, integrate_panel(g, c, d, opts.rel_tol * 1e-2, opts.gk_max_depth));
    c = d;
  }
  if (c < b) {
    if (std::isinf(b)) {
      accumulate(out, integrate_outward(g, c, c, opts));
    } else {
      accumulate(out, integrate_panel(g, c, b, opts.rel_tol * 1e-2, opts.gk_max_depth));
    }
  }
  return out;
}

}  // namespace

IntegralResult integrate_line(const std::function<double(double)>& g, double lower,
                              double upper, const QuadratureOptions& opts) {
  IntegralResult out;
  if (!(lower < upper)) return out;
  if (upper > 0.0) accumulate(out, half_line(g, std::max(lower, 0.0), upper, opts));
  if (lower < 0.0) {
    auto mirrored = [&g](double y) { return g(-y); };
    accumulate(out, half_line(mirrored, std::max(-upper, 0.0), -lower, opts));
  }
  return out;
}

double meixner_support_radius(const MeixnerParams& p, double tail_tol) {
  const double rate = (std::numbers::pi - std::abs(p.beta)) / p.alpha;
  return (std::log(2.0 * std::max(p.delta, 1.0) / tail_tol)) / rate;
}

std::vector<double> default_breakpoints(const LevyModel& model, std::size_t i) {
  const std::size_t n = model.dimension();
  if (i >= n) throw ArgumentError("coordinate out of range");
  if (model.copula_part()) {
    const auto& p = model.copula_part()->marginals[i];
    const int kmax = static_cast<int>(std::ceil(std::log2(meixner_support_radius(p))));
    const int kmin = n == 1 ? -40 : (n == 2 ? -30 : -14);
    return dyadic_breakpoints(kmin, kmax);
  }
  if (model.density_part()) {
    const double lo = model.density_part()->lower[static_cast<Eigen::Index>(i)];
    const double hi = model.density_part()->upper[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw UnsupportedRepresentation("cannot discretize a density on an unbounded box");
    const int panels = n == 1 ? 256 : (n == 2 ? 48 : 16);
    std::vector<double> out;
    for (int k = 0; k <= panels; ++k) out.push_back(lo + (hi - lo) * k / panels);
    if (lo < 0.0 && hi > 0.0) {
      out.push_back(0.0);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
  }
  throw UnsupportedRepresentation("model has no continuous jump part");
}

DiscreteMeasure discretize_continuous(const LevyModel& model,
                                      const std::vector<std::vector<double>>& breakpoints,
                                      int order) {
  const std::size_t n = model.dimension();
  if (breakpoints.size() != n) throw ArgumentError("need one breakpoint list per coordinate");
  std::vector<AxisRule> rules;
  for (const auto& b : breakpoints) rules.push_back(composite_rule(b, order));

  // Per-axis tables for copula models: tail integral and marginal density
  // at every node, so the joint density is a product lookup.
  std::vector<std::vector<double>> tails(n);
  std::vector<std::vector<double>> dens(n);
  const bool copula = model.copula_part().has_value();
  if (copula) {
    const auto& cj = *model.copula_part();
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = MarginalMeasure::meixner(cj.marginals[i]);
      for (double x : rules[i].nodes) {
        tails[i].push_back(n > 1 ? tail_integral(m, x) : 0.0);
        dens[i].push_back(meixner_levy_density(x, cj.marginals[i]));
      }
    }
  }

  std::size_t total = 1;
  for (const auto& r : rules) total *= r.nodes.size();
  DiscreteMeasure out(n);
  out.reserve(total);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n);
  std::vector<double> u(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    double marg = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
      if (copula) {
        u[i] = tails[i][idx[i]];
        marg *= dens[i][idx[i]];
      }
    }
    double d = 0.0;
    if (copula) {
      d = n == 1 ? marg : clayton_copula_mixed_partial(u, model.copula_part()->copula) * marg;
    } else {
      d = model.continuous_density(x);
    }
    if (d > 0.0 && std::isfinite(d)) out.add(x, w * d);
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < rules[i].nodes.size()) break;
      idx[i] = 0;
    }
  }
  return out;
}

IntegralResult integrate_continuous(const LevyModel& model, const JumpFunction& f,
                                    const QuadratureOptions& opts) {
  IntegralResult out;
  if (!model.has_continuous_part()) return out;
  if (model.dimension() == 1) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (model.density_part()) {
      lo = model.density_part()->lower[0];
      hi = model.density_part()->upper[0];
    }
    auto g = [&](double x) {
      const std::span<const double> s(&x, 1);
      const double d = model.continuous_density(s);
      return d == 0.0 ? 0.0 : f(s) * d;
    };
    return integrate_line(g, lo, hi, opts);
  }
  out.value = model.discretization().integrate(f);
  if (!std::isfinite(out.value)) {
    out.converged = false;
    out.diagnostic = "non-finite integral over the discretized measure";
  }
  return out;
}

IntegralResult integrate_jumps(const LevyModel& model, const JumpFunction& f,
                               const QuadratureOptions& opts) {
  IntegralResult out = integrate_continuous(model, f, opts);
  long double s = 0.0L;
  for (const auto& a : model.atoms())
    s += static_cast<long double>(a.intensity) *
         f(std::span<const double>(a.x.data(), static_cast<std::size_t>(a.x.size())));
  out.value += static_cast<double>(s);
  return out;
}

}  // namespace levybsde
