#include "levybsde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levybsde/error.hpp"

namespace levybsde {

namespace bq = boost::math::quadrature;

namespace {

// Adaptive G7-K15 on [a, b] mapped onto [-1, 1].
double gk15(const std::function<double(double)>& f, double a, double b, int depth, double tol,
            double* err, double* l1) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  return bq::gauss_kronrod<double, 15>::integrate(
      [&](double t) { return f(mid + half * t) * half; }, -1.0, 1.0,
      static_cast<unsigned>(depth), tol, err, l1);
}

}  // namespace

IntegralResult integrate_panel(const std::function<double(double)>& f, double a,
                               double b, double rel_tol, int max_depth) {
  IntegralResult r;
  if (a == b) return r;
  double err = 0.0;
  double l1 = 0.0;
  r.value = gk15(f, a, b, max_depth, rel_tol, &err, &l1);
  r.error = err;
  r.shells = 1;
  if (!std::isfinite(r.value)) {
    r.converged = false;
    r.diagnostic = "non-finite panel integral";
  }
  return r;
}

namespace {

// Tracks successive shell magnitudes and applies the stopping and
// divergence rules shared by the outward and inward integrators.
class ShellMonitor {
 public:
  explicit ShellMonitor(const QuadratureOptions& opts) : opts_(opts) {}

  enum class State { Continue, Converged, Diverged };

  State push(double shell_abs, double total_abs) {
    ++count_;
    if (!std::isfinite(shell_abs) || !std::isfinite(total_abs)) {
      reason_ = "non-finite shell contribution";
      return State::Diverged;
    }
    if (prev_ > 0.0 && shell_abs > 0.0) {
      const double ratio = shell_abs / prev_;
      if (ratio >= opts_.decay_factor) {
        ratios_.push_back(ratio);
      } else {
        ratios_.clear();
      }
      if (static_cast<int>(ratios_.size()) >= opts_.divergence_window) {
        const double last = ratios_.back();
        const double before = ratios_[ratios_.size() - 2];
        const double predicted = last + (last - before);
        if (predicted >= opts_.decay_factor) {
          std::ostringstream os;
          os << "shell contributions stopped decaying: " << ratios_.size()
             << " consecutive ratios >= " << opts_.decay_factor
             << " (last ratio " << last << ")";
          reason_ = os.str();
          return State::Diverged;
        }
      }
    } else if (shell_abs > 0.0) {
      ratios_.clear();
    }
    prev_ = shell_abs;

    const double negligible =
        std::max(opts_.abs_tol * 1e-3, opts_.rel_tol * 1e-3 * total_abs);
    if (count_ >= 2 && shell_abs <= negligible) {
      if (++quiet_ >= 2) return State::Converged;
    } else {
      quiet_ = 0;
    }
    return State::Continue;
  }

  const std::string& reason() const { return reason_; }

 private:
  const QuadratureOptions& opts_;
  double prev_ = 0.0;
  int count_ = 0;
  int quiet_ = 0;
  std::vector<double> ratios_;
  std::string reason_;
};

IntegralResult shell_loop(const std::function<double(double)>& f,
                          const std::function<std::pair<double, double>(int)>& panel,
                          int max_shells, const QuadratureOptions& opts,
                          const char* direction) {
  IntegralResult out;
  ShellMonitor monitor(opts);
  double total_abs = 0.0;
  // Kahan-compensated running sum of panel values.
  double comp = 0.0;
  for (int k = 0; k < max_shells; ++k) {
    const auto [a, b] = panel(k);
    double err = 0.0;
    double l1 = 0.0;
    const double v = gk15(f, a, b, opts.gk_max_depth, opts.rel_tol * 1e-2, &err, &l1);
    const double y = v - comp;
    const double t = out.value + y;
    comp = (t - out.value) - y;
    out.value = t;
    out.error += err;
    total_abs += l1;
    out.shells = k + 1;
    const auto state = monitor.push(l1, total_abs);
    if (state == ShellMonitor::State::Converged) return out;
    if (state == ShellMonitor::State::Diverged) {
      out.converged = false;
      out.diagnostic = std::string(direction) + ": " + monitor.reason();
      return out;
    }
  }
  out.converged = false;
  std::ostringstream os;
  os << direction << ": no convergence after " << max_shells << " shells";
  out.diagnostic = os.str();
  return out;
}

}  // namespace

IntegralResult integrate_outward(const std::function<double(double)>& f, double a,
                                 double first_width,
                                 const QuadratureOptions& opts) {
  if (!(first_width > 0.0)) throw ArgumentError("first panel width must be positive");
  auto panel = [a, first_width](int k) {
    const double lo = a + first_width * (std::ldexp(1.0, k) - 1.0);
    const double hi = a + first_width * (std::ldexp(1.0, k + 1) - 1.0);
    return std::make_pair(lo, hi);
  };
  return shell_loop(f, panel, opts.max_outward_shells, opts, "outward shells");
}

IntegralResult integrate_inward(const std::function<double(double)>& f, double b,
                                const QuadratureOptions& opts) {
  if (!(b > 0.0)) throw ArgumentError("inward integration needs b > 0");
  auto panel = [b](int k) {
    return std::make_pair(std::ldexp(b, -(k + 1)), std::ldexp(b, -k));
  };
  return shell_loop(f, panel, opts.max_inward_shells, opts, "inward shells");
}

namespace {

template <unsigned N>
GaussLegendre make_rule() {
  using Q = bq::gauss<double, N>;
  const auto& x = Q::abscissa();
  const auto& w = Q::weights();
  GaussLegendre g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      g.nodes.push_back(0.0);
      g.weights.push_back(w[i]);
    } else {
      g.nodes.push_back(-x[i]);
      g.weights.push_back(w[i]);
      g.nodes.push_back(x[i]);
      g.weights.push_back(w[i]);
    }
  }
  std::vector<std::size_t> idx(g.nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return g.nodes[a] < g.nodes[b]; });
  GaussLegendre sorted;
  for (auto i : idx) {
    sorted.nodes.push_back(g.nodes[i]);
    sorted.weights.push_back(g.weights[i]);
  }
  return sorted;
}

GaussLegendre build_rule(int order) {
  switch (order) {
    case 2: return make_rule<2>();
    case 3: return make_rule<3>();
    case 4: return make_rule<4>();
    case 5: return make_rule<5>();
    case 6: return make_rule<6>();
    case 7: return make_rule<7>();
    case 8: return make_rule<8>();
    case 10: return make_rule<10>();
    case 12: return make_rule<12>();
    case 16: return make_rule<16>();
    case 20: return make_rule<20>();
    default:
      throw ArgumentError("unsupported Gauss-Legendre order " + std::to_string(order));
  }
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

AxisRule composite_rule(const std::vector<double>& breakpoints, int order) {
  if (breakpoints.size() < 2) throw ArgumentError("need at least two breakpoints");
  const auto& gl = gauss_legendre(order);
  AxisRule rule;
  rule.nodes.reserve((breakpoints.size() - 1) * gl.nodes.size());
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    if (!(b > a)) throw ArgumentError("breakpoints must be strictly increasing");
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      rule.nodes.push_back(mid + half * gl.nodes[i]);
      rule.weights.push_back(half * gl.weights[i]);
      rule.panel.push_back(static_cast<int>(p));
    }
  }
  return rule;
}

std::vector<double> dyadic_breakpoints(int kmin, int kmax) {
  if (kmin > kmax) throw ArgumentError("kmin > kmax");
  std::vector<double> out;
  for (int k = kmax; k >= kmin; --k) out.push_back(-std::ldexp(1.0, k));
  for (int k = kmin; k <= kmax; ++k) out.push_back(std::ldexp(1.0, k));
  return out;
}

int dyadic_shell(double x) {
  int e = 0;
  std::frexp(std::abs(x), &e);
  return e - 1;
}

}  // namespace levybsde
