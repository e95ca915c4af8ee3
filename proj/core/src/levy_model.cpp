#include "levybsde/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "levybsde/error.hpp"
#include "levybsde/measure.hpp"

namespace levybsde {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_vector(const Vector& v) { return v.allFinite(); }

}  // namespace

void MeixnerParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ArgumentError("Meixner alpha must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ArgumentError("Meixner delta must be positive");
  if (!(beta > -kPi && beta < kPi)) throw ArgumentError("Meixner beta must lie in (-pi, pi)");
  if (!std::isfinite(mu)) throw ArgumentError("Meixner mu must be finite");
}

void ClaytonCopulaParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ArgumentError("copula mu must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ArgumentError("copula eta must lie in [0, 1]");
}

double MarginalMeasure::density(double x) const {
  if (const auto* p = std::get_if<MeixnerParams>(&kind)) return meixner_levy_density(x, *p);
  throw UnsupportedRepresentation("Poisson marginal has no density");
}

struct LevyModel::Cache {
  std::once_flag once;
  std::unique_ptr<DiscreteMeasure> measure;
};

// ---------------------------------------------------------------------------

LevyModel LevyModel::pure_drift(Vector drift, Matrix sigma) {
  LevyModel m;
  m.n_ = static_cast<std::size_t>(drift.size());
  m.drift_ = std::move(drift);
  m.sigma_ = std::move(sigma);
  m.validate();
  return m;
}

LevyModel LevyModel::atomic(Vector drift, std::vector<Atom> atoms, Matrix sigma) {
  LevyModel m;
  m.n_ = static_cast<std::size_t>(drift.size());
  m.drift_ = std::move(drift);
  m.sigma_ = std::move(sigma);
  m.atoms_ = std::move(atoms);
  m.validate();
  return m;
}

LevyModel LevyModel::meixner(const MeixnerParams& params, double drift) {
  LevyModel m;
  m.n_ = 1;
  m.drift_ = Vector::Constant(1, drift);
  m.copula_ = CopulaJumps{{params}, ClaytonCopulaParams{}};
  m.validate();
  return m;
}

LevyModel LevyModel::copula(Vector drift, std::vector<MeixnerParams> marginals,
                            const ClaytonCopulaParams& copula, Matrix sigma) {
  LevyModel m;
  m.n_ = static_cast<std::size_t>(drift.size());
  m.drift_ = std::move(drift);
  m.sigma_ = std::move(sigma);
  m.copula_ = CopulaJumps{std::move(marginals), copula};
  m.validate();
  return m;
}

LevyModel LevyModel::from_marginals(Vector drift,
                                    const std::vector<MarginalMeasure>& marginals,
                                    std::optional<ClaytonCopulaParams> copula,
                                    Matrix sigma) {
  const bool all_meixner = std::all_of(marginals.begin(), marginals.end(),
                                       [](const auto& m) { return m.is_continuous(); });
  if (all_meixner) {
    std::vector<MeixnerParams> params;
    for (const auto& m : marginals) params.push_back(std::get<MeixnerParams>(m.kind));
    if (marginals.size() > 1 && !copula)
      throw ArgumentError("continuous marginals in dimension > 1 need a copula");
    return LevyModel::copula(std::move(drift), std::move(params),
                             copula.value_or(ClaytonCopulaParams{}), std::move(sigma));
  }
  if (marginals.size() == 1) {
    const double lambda = std::get<PoissonUnitJump>(marginals[0].kind).intensity;
    if (!(lambda > 0.0)) throw ArgumentError("Poisson intensity must be positive");
    return atomic(std::move(drift), {Atom{Vector::Ones(1), lambda}}, std::move(sigma));
  }
  throw ArgumentError(
      "Poisson marginals in dimension > 1: build the atoms explicitly "
      "(common_poisson_measure or poisson_copula_with_margins)");
}

LevyModel LevyModel::with_density(Vector drift, ExplicitDensity density, Matrix sigma) {
  LevyModel m;
  m.n_ = static_cast<std::size_t>(drift.size());
  m.drift_ = std::move(drift);
  m.sigma_ = std::move(sigma);
  m.density_ = std::move(density);
  m.validate();
  return m;
}

LevyModel LevyModel::with_drift(Vector drift) const {
  LevyModel m = *this;
  m.drift_ = std::move(drift);
  m.validate();
  return m;
}

LevyModel LevyModel::with_sigma(Matrix sigma) const {
  LevyModel m = *this;
  m.sigma_ = std::move(sigma);
  m.validate();
  return m;
}

LevyModel LevyModel::with_atoms(std::vector<Atom> atoms) const {
  LevyModel m = *this;
  for (auto& a : atoms) m.atoms_.push_back(std::move(a));
  m.validate();
  return m;
}

bool LevyModel::has_brownian_part() const { return sigma_.cwiseAbs().maxCoeff() > 0.0; }

void LevyModel::validate() {
  if (n_ == 0) throw ArgumentError("model dimension must be at least 1");
  if (!finite_vector(drift_)) throw ArgumentError("drift must be finite");
  if (sigma_.size() == 0) sigma_ = Matrix::Zero(n_, n_);
  if (sigma_.rows() != static_cast<Eigen::Index>(n_) || sigma_.cols() != sigma_.rows())
    throw ArgumentError("sigma must be n x n");
  if (!sigma_.allFinite()) throw ArgumentError("sigma must be finite");
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ArgumentError("sigma must be symmetric");
  if (has_brownian_part()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
      throw ArgumentError("sigma must be positive semidefinite");
  }
  for (const auto& a : atoms_) {
    if (a.x.size() != static_cast<Eigen::Index>(n_))
      throw ArgumentError("atom dimension does not match the model");
    if (!a.x.allFinite() || !std::isfinite(a.intensity) || a.intensity < 0.0)
      throw ArgumentError("atoms need finite locations and nonnegative intensity");
    if (a.x.cwiseAbs().maxCoeff() == 0.0) throw ArgumentError("atom at the origin");
  }
  if (copula_ && density_) throw ArgumentError("model has two continuous parts");
  if (copula_) {
    if (copula_->marginals.size() != n_)
      throw ArgumentError("number of marginals does not match the dimension");
    for (const auto& p : copula_->marginals) p.validate();
    copula_->copula.validate();
    if (n_ > 3)
      throw UnsupportedRepresentation("continuous copula models are limited to n <= 3");
  }
  if (density_) {
    if (!density_->density) throw ArgumentError("explicit density is empty");
    if (density_->lower.size() != static_cast<Eigen::Index>(n_) ||
        density_->upper.size() != static_cast<Eigen::Index>(n_))
      throw ArgumentError("density box dimension does not match");
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(density_->lower[i] < density_->upper[i]))
        throw ArgumentError("density box needs lower < upper");
      if (n_ > 1 && !(std::isfinite(density_->lower[i]) && std::isfinite(density_->upper[i])))
        throw ArgumentError("multidimensional density boxes must be finite");
    }
  }
  if (!cache_) cache_ = std::make_shared<Cache>();
}

double LevyModel::continuous_density(std::span<const double> x) const {
  if (x.size() != n_) throw ArgumentError("point dimension mismatch");
  if (copula_) return joint_levy_density(x, *this);
  if (density_) {
    for (std::size_t i = 0; i < n_; ++i)
      if (x[i] < density_->lower[i] || x[i] > density_->upper[i]) return 0.0;
    return density_->density(x);
  }
  return 0.0;
}

const DiscreteMeasure& LevyModel::discretization() const {
  if (!has_continuous_part())
    throw UnsupportedRepresentation("model has no continuous jump part");
  std::call_once(cache_->once, [this] {
    std::vector<std::vector<double>> bps;
    for (std::size_t i = 0; i < n_; ++i) bps.push_back(default_breakpoints(*this, i));
    const int order = n_ >= 3 ? 4 : 8;
    cache_->measure = std::make_unique<DiscreteMeasure>(discretize_continuous(*this, bps, order));
  });
  return *cache_->measure;
}

// --- Meixner ---------------------------------------------------------------

double meixner_levy_density(double x, const MeixnerParams& p) {
  if (x == 0.0) throw DomainError("Meixner Lévy density is singular at 0");
  const double ax = std::abs(x);
  const double z = kPi * ax / p.alpha;
  // 1/sinh(z) = 2 e^{-z} / (1 - e^{-2z}), stable for large z.
  return p.delta * 2.0 * std::exp(p.beta * x / p.alpha - z) / (ax * -std::expm1(-2.0 * z));
}

double meixner_cumulant(double theta, const MeixnerParams& p) {
  const double arg = p.alpha * theta + p.beta;
  if (!(std::abs(arg) < kPi)) throw DomainError("Meixner cumulant argument outside (-pi, pi)");
  return p.mu * theta +
         2.0 * p.delta * (std::log(std::cos(p.beta / 2.0)) - std::log(std::cos(arg / 2.0)));
}

double meixner_second_cumulant(const MeixnerParams& p) {
  return p.alpha * p.alpha * p.delta / (1.0 + std::cos(p.beta));
}

// --- Clayton Lévy copula ---------------------------------------------------

double clayton_copula(std::span<const double> u, const ClaytonCopulaParams& params) {
  if (u.empty()) throw ArgumentError("copula needs at least one argument");
  double s = 0.0;
  bool positive = true;
  for (double v : u) {
    if (v == 0.0) return 0.0;
    if (std::isinf(v)) continue;
    s += std::pow(std::abs(v), -params.mu);
    if (v < 0.0) positive = !positive;
  }
  const double n = static_cast<double>(u.size());
  const double sign = positive ? params.eta : -(1.0 - params.eta);
  if (s == 0.0) return std::numeric_limits<double>::infinity() * sign;
  return std::pow(2.0, 2.0 - n) * std::pow(s, -1.0 / params.mu) * sign;
}

double clayton_copula_mixed_partial(std::span<const double> u,
                                    const ClaytonCopulaParams& params) {
  if (u.empty()) throw ArgumentError("copula needs at least one argument");
  const std::size_t n = u.size();
  const double mu = params.mu;
  double s = 0.0;
  double log_prod = 0.0;
  bool positive = true;
  for (double v : u) {
    if (v == 0.0) throw DomainError("mixed partial needs nonzero arguments");
    const double a = std::abs(v);
    s += std::pow(a, -mu);
    log_prod += (-mu - 1.0) * std::log(a);
    if (v < 0.0) positive = !positive;
  }
  double factor = 1.0;
  for (std::size_t k = 1; k < n; ++k) factor *= 1.0 + static_cast<double>(k) * mu;
  const double weight = positive ? params.eta : 1.0 - params.eta;
  const double log_val = (2.0 - static_cast<double>(n)) * std::log(2.0) +
                         (-1.0 / mu - static_cast<double>(n)) * std::log(s) + log_prod;
  return factor * weight * std::exp(log_val);
}

double clayton_conditional_inverse(double v, double u1, const ClaytonCopulaParams& params) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError("conditional inverse needs v in (0, 1)");
  if (u1 == 0.0) throw DomainError("conditional inverse needs u1 != 0");
  const double mu = params.mu;
  const double expo = -mu / (1.0 + mu);
  // Split point: mass of the opposite-sign branch.
  const double same = u1 > 0.0 ? params.eta : 1.0 - params.eta;
  const double opposite = 1.0 - same;
  const double a = std::abs(u1);
  if (v > opposite) {
    const double w = (v - opposite) / same;
    const double r = std::pow(std::pow(w, expo) - 1.0, 1.0 / mu);
    return std::copysign(a / r, u1);
  }
  const double w = 1.0 - v / opposite;
  const double r = std::pow(std::pow(w, expo) - 1.0, 1.0 / mu);
  return -std::copysign(a / r, u1);
}

// --- measure-level ----------------------------------------------------------

double tail_integral(const MarginalMeasure& m, double x, double tol) {
  if (x == 0.0) throw DomainError("tail integral is undefined at 0");
  if (const auto* pj = std::get_if<PoissonUnitJump>(&m.kind)) {
    return x > 0.0 && x <= 1.0 ? pj->intensity : 0.0;
  }
  const auto& p = std::get<MeixnerParams>(m.kind);
  QuadratureOptions opts;
  opts.rel_tol = tol;
  opts.abs_tol = 0.0;
  const double a = std::abs(x);
  const double s = x > 0.0 ? 1.0 : -1.0;
  auto f = [&](double y) { return meixner_levy_density(s * y, p); };
  const auto r = integrate_outward(f, a, a, opts);
  if (!r.converged) throw NumericalError("tail integral: " + r.diagnostic);
  return s * r.value;
}

double joint_levy_density(std::span<const double> x, const LevyModel& model) {
  if (x.size() != model.dimension()) throw ArgumentError("point dimension mismatch");
  if (model.density_part()) return model.continuous_density(x);
  if (!model.copula_part())
    throw UnsupportedRepresentation("atomic models have no joint density; use the atoms");
  const auto& cj = *model.copula_part();
  if (cj.marginals.size() == 1) return meixner_levy_density(x[0], cj.marginals[0]);
  std::vector<double> u(x.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto m = MarginalMeasure::meixner(cj.marginals[i]);
    u[i] = tail_integral(m, x[i]);
    prod *= meixner_levy_density(x[i], cj.marginals[i]);
  }
  return clayton_copula_mixed_partial(u, cj.copula) * prod;
}

double common_poisson_intensity(double lambda1, double lambda2,
                                const ClaytonCopulaParams& params) {
  if (!(lambda1 > 0.0 && lambda2 > 0.0)) throw ArgumentError("Poisson intensities must be positive");
  params.validate();
  const double mu = params.mu;
  return params.eta * (1.0 + mu) * std::pow(lambda1 * lambda2, mu) /
         std::pow(std::pow(lambda1, mu) + std::pow(lambda2, mu), 1.0 / mu + 2.0);
}

LevyModel common_poisson_measure(double lambda1, double lambda2,
                                 const ClaytonCopulaParams& params) {
  const double c = common_poisson_intensity(lambda1, lambda2, params);
  Vector drift(2);
  drift << -lambda1, -lambda2;
  std::vector<Atom> atoms;
  if (c > 0.0) atoms.push_back(Atom{Vector::Ones(2), c});
  return LevyModel::atomic(drift, std::move(atoms));
}

LevyModel poisson_copula_with_margins(double lambda1, double lambda2,
                                      const ClaytonCopulaParams& params) {
  const double c = common_poisson_intensity(lambda1, lambda2, params);
  if (c > std::min(lambda1, lambda2))
    throw ArgumentError("common intensity exceeds a marginal intensity");
  Vector drift(2);
  drift << -lambda1, -lambda2;
  std::vector<Atom> atoms;
  auto push = [&](double x1, double x2, double w) {
    if (w <= 0.0) return;
    Vector x(2);
    x << x1, x2;
    atoms.push_back(Atom{x, w});
  };
  push(1.0, 1.0, c);
  push(1.0, 0.0, lambda1 - c);
  push(0.0, 1.0, lambda2 - c);
  return LevyModel::atomic(drift, std::move(atoms));
}

namespace {

double atom_sum(const LevyModel& model, const std::function<double(const Vector&)>& f) {
  long double s = 0.0L;
  for (const auto& a : model.atoms()) s += static_cast<long double>(a.intensity) * f(a.x);
  return static_cast<double>(s);
}

// Single nonzero coordinate of p, or -1.
int single_axis(const MultiIndex& p) {
  int axis = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;
    if (axis >= 0) return -1;
    axis = static_cast<int>(i);
  }
  return axis;
}

}  // namespace

double moment(const LevyModel& model, const MultiIndex& p, double tol) {
  if (p.size() != model.dimension()) throw ArgumentError("multi-index dimension mismatch");
  if (p.degree() < 1) throw ArgumentError("moments need |p| >= 1");
  double value = atom_sum(model, [&](const Vector& x) {
    return p.monomial(std::span<const double>(x.data(), x.size()));
  });
  if (!model.has_continuous_part()) return value;

  QuadratureOptions opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol;
  IntegralResult r;
  const int axis = single_axis(p);
  if (model.copula_part() && axis >= 0) {
    // The copula leaves no mass on the axes, so moments of one coordinate
    // are moments of that marginal.
    const auto& mp = model.copula_part()->marginals[static_cast<std::size_t>(axis)];
    const int k = p[static_cast<std::size_t>(axis)];
    r = integrate_line(
        [&](double x) { return std::pow(x, k) * meixner_levy_density(x, mp); },
        -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), opts);
  } else {
    r = integrate_continuous(
        model, [&](std::span<const double> x) { return p.monomial(x); }, opts);
  }
  if (!r.converged) {
    throw NumericalError("moment m_" + p.to_string() +
                         " diverges or failed to converge (exponential / finite-moment "
                         "assumption violated?): " + r.diagnostic);
  }
  return value + r.value;
}

std::vector<double> moments(const LevyModel& model, const std::vector<MultiIndex>& indices,
                            double tol) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (const auto& p : indices) out.push_back(moment(model, p, tol));
  return out;
}

bool has_finite_variation(const LevyModel& model) {
  if (!model.has_continuous_part()) return true;
  if (model.copula_part()) return false;
  const auto r = integrate_continuous(model, [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  });
  return r.converged && std::isfinite(r.value);
}

Hypothesis1Report check_hypothesis1(const LevyModel& model, double eps, double lambda) {
  Hypothesis1Report rep;
  if (!(eps > 0.0) || !(lambda > 0.0)) {
    rep.diagnostic = "eps and lambda must be positive";
    return rep;
  }
  auto weight = [lambda](double norm) { return std::exp(lambda * norm); };
  rep.value = atom_sum(model, [&](const Vector& x) {
    const double nx = x.norm();
    return nx >= eps ? weight(nx) : 0.0;
  });
  rep.holds = std::isfinite(rep.value);
  if (!model.has_continuous_part()) return rep;

  const std::size_t n = model.dimension();
  QuadratureOptions opts;
  if (n == 1) {
    auto g = [&](double x) {
      const double v = model.continuous_density(std::span<const double>(&x, 1));
      return v == 0.0 ? 0.0 : weight(std::abs(x)) * v;
    };
    const double inf = std::numeric_limits<double>::infinity();
    double lo = -inf;
    double hi = inf;
    if (model.density_part()) {
      lo = model.density_part()->lower[0];
      hi = model.density_part()->upper[0];
    }
    IntegralResult pos;
    IntegralResult neg;
    if (hi > eps) pos = integrate_line(g, std::max(lo, eps), hi, opts);
    if (lo < -eps) neg = integrate_line(g, lo, std::min(hi, -eps), opts);
    if (!pos.converged || !neg.converged) {
      rep.holds = false;
      rep.diagnostic = !pos.converged ? pos.diagnostic : neg.diagnostic;
      return rep;
    }
    rep.value += pos.value + neg.value;
    return rep;
  }

  if (model.copula_part()) {
    // ||x|| >= |x_i| forces the marginal exponential moment to exist; the
    // bound exp(lambda ||x||) <= mean_i exp(n lambda |x_i|) makes it enough.
    for (const auto& mp : model.copula_part()->marginals) {
      const double rate = (kPi - std::abs(mp.beta)) / mp.alpha;
      if (lambda >= rate) {
        std::ostringstream os;
        os << "marginal tail decays at rate " << rate << " <= lambda " << lambda;
        rep.holds = false;
        rep.diagnostic = os.str();
        return rep;
      }
      if (static_cast<double>(n) * lambda >= rate) {
        std::ostringstream os;
        os << "inconclusive: n*lambda = " << static_cast<double>(n) * lambda
           << " reaches marginal decay rate " << rate;
        rep.holds = false;
        rep.diagnostic = os.str();
        return rep;
      }
    }
  }
  const auto& dm = model.discretization();
  rep.value += dm.integrate([&](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    const double nx = std::sqrt(s);
    return nx >= eps ? weight(nx) : 0.0;
  });
  rep.holds = std::isfinite(rep.value);
  return rep;
}

Vector compensator_mean(const LevyModel& model) {
  const std::size_t n = model.dimension();
  Vector out = model.drift();
  for (const auto& a : model.atoms())
    if (a.x.norm() >= 1.0) out += a.intensity * a.x;
  if (!model.has_continuous_part()) return out;

  const double inf = std::numeric_limits<double>::infinity();
  if (n == 1) {
    double lo = -inf;
    double hi = inf;
    if (model.density_part()) {
      lo = model.density_part()->lower[0];
      hi = model.density_part()->upper[0];
    }
    auto g = [&](double x) { return x * model.continuous_density(std::span<const double>(&x, 1)); };
    IntegralResult pos;
    IntegralResult neg;
    if (hi > 1.0) pos = integrate_line(g, std::max(lo, 1.0), hi);
    if (lo < -1.0) neg = integrate_line(g, lo, std::min(hi, -1.0));
    if (!pos.converged || !neg.converged)
      throw NumericalError("compensator mean diverges: " +
                           (pos.converged ? neg.diagnostic : pos.diagnostic));
    out[0] += pos.value + neg.value;
    return out;
  }
  const auto& dm = model.discretization();
  for (std::size_t i = 0; i < n; ++i) {
    out[static_cast<Eigen::Index>(i)] += dm.integrate([&](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s >= 1.0 ? x[i] : 0.0;
    });
  }
  return out;
}

Vector exponential_compensator(const LevyModel& model) {
  const std::size_t n = model.dimension();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& a : model.atoms()) {
    const bool small = a.x.norm() <= 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = a.x[static_cast<Eigen::Index>(j)];
      out[static_cast<Eigen::Index>(j)] += a.intensity * (std::expm1(z) - (small ? z : 0.0));
    }
  }
  if (!model.has_continuous_part()) return out;

  const double inf = std::numeric_limits<double>::infinity();
  if (n == 1) {
    double lo = -inf;
    double hi = inf;
    if (model.density_part()) {
      lo = model.density_part()->lower[0];
      hi = model.density_part()->upper[0];
    }
    auto dens = [&](double x) { return model.continuous_density(std::span<const double>(&x, 1)); };
    auto inner = [&](double x) { return (std::expm1(x) - x) * dens(x); };
    auto outer = [&](double x) { return std::expm1(x) * dens(x); };
    IntegralResult parts[3];
    parts[0] = integrate_line(inner, std::max(lo, -1.0), std::min(hi, 1.0));
    if (hi > 1.0) parts[1] = integrate_line(outer, std::max(lo, 1.0), hi);
    if (lo < -1.0) parts[2] = integrate_line(outer, lo, std::min(hi, -1.0));
    for (const auto& r : parts) {
      if (!r.converged) throw NumericalError("exponential moment diverges: " + r.diagnostic);
      out[0] += r.value;
    }
    return out;
  }
  const auto& dm = model.discretization();
  for (std::size_t j = 0; j < n; ++j) {
    out[static_cast<Eigen::Index>(j)] += dm.integrate([&](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::expm1(x[j]) - (s <= 1.0 ? x[j] : 0.0);
    });
  }
  return out;
}

Vector risk_neutral_drift(const LevyModel& model) {
  Vector a = -exponential_compensator(model);
  for (Eigen::Index j = 0; j < a.size(); ++j) a[j] -= 0.5 * model.sigma()(j, j);
  return a;
}

}  // namespace levybsde
