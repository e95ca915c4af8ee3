#pragma once

#include <functional>
#include <string>
#include <vector>

namespace levybsde {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_outward_shells = 80;
  int max_inward_shells = 120;
  int gk_max_depth = 15;
  /// Divergence: this many consecutive shells that fail to shrink by
  /// decay_factor, without the shrink ratio improving.
  int divergence_window = 5;
  double decay_factor = 0.9;
};

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  int shells = 0;
  std::string diagnostic;
};

/// Adaptive Gauss-Kronrod (7-15) on [a, b], finite bounds.
IntegralResult integrate_panel(const std::function<double(double)>& f, double a,
                               double b, double rel_tol, int max_depth = 15);

/// int_a^inf f over panels [a, a+w], [a+w, a+3w], ... with doubling widths.
/// Stops once panels are negligible; flags divergence by the shell ratio test.
IntegralResult integrate_outward(const std::function<double(double)>& f, double a,
                                 double first_width,
                                 const QuadratureOptions& opts = {});

/// int_0^b f over dyadic panels [b/2, b], [b/4, b/2], ...; f may be
/// singular at 0 as long as the integral converges.
IntegralResult integrate_inward(const std::function<double(double)>& f, double b,
                                const QuadratureOptions& opts = {});

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

/// Composite Gauss-Legendre rule on consecutive panels between sorted
/// breakpoints.
struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<int> panel;  // index of the panel each node belongs to
};
AxisRule composite_rule(const std::vector<double>& breakpoints, int order);

/// Signed dyadic breakpoints +-2^k for k in [kmin, kmax] plus 0 is NOT
/// included; the returned list is sorted and spans [-2^kmax, 2^kmax].
std::vector<double> dyadic_breakpoints(int kmin, int kmax);

/// Shell index k with 2^k <= |x| < 2^{k+1}.
int dyadic_shell(double x);

}  // namespace levybsde
