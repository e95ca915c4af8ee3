#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <optional>

#include "commands.hpp"
#include "levybsde/bsde.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/pricing.hpp"
#include "levybsde/simulator.hpp"
#include "output.hpp"

namespace levybsde::cli {

namespace {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct Battery {
  const RunConfig& cfg;
  const LevyModel& model;
  std::optional<OrthoBasis> basis;
  std::optional<PathSet> paths;
  std::optional<GridSolution> linear;

  const OrthoBasis& get_basis() {
    if (!basis) basis.emplace(model, cfg.basis.D, cfg.basis.tol);
    return *basis;
  }
  const PathSet& get_paths() {
    if (!paths) {
      const Simulator sim(model, cfg.simulation.eps);
      paths = simulate_path_set(sim, get_basis(), TimeGrid(cfg.simulation.T, cfg.verify.steps),
                                cfg.verify.npaths, cfg.simulation.seed, cfg.threads);
    }
    return *paths;
  }
  const GridSolution& get_linear() {
    if (!linear) {
      const auto g = build_terminal(*cfg.terminal_json, model.dimension());
      PdieOptions opts;
      opts.basis_degree = cfg.basis.D;
      opts.threads = cfg.threads;
      linear.emplace(with_stable_steps(cfg.pdie->steps, [&](int steps) {
        return solve_linear_pdie(model, {g},
                                 make_pdie_grid(*cfg.pdie, cfg.simulation.T, model.dimension(), steps), opts);
      }));
    }
    return *linear;
  }
  BsdeData bsde_data() const {
    return BsdeData{build_driver(cfg.bsde->driver),
                    build_terminal(*cfg.terminal_json, model.dimension()), cfg.bsde->D};
  }
  BsdeOptions bsde_options() const {
    BsdeOptions o;
    o.regression_degree = cfg.bsde->regression_degree;
    o.max_iterations = cfg.bsde->max_iterations;
    o.tolerance = cfg.bsde->picard_tol;
    o.beta = cfg.bsde->beta;
    o.allow_rank_deficient = cfg.bsde->allow_rank_deficient;
    o.threads = cfg.threads;
    return o;
  }

  CheckResult martingale_diagnostics() {
    const auto& ps = get_paths();
    const double dt = ps.grid.dt();
    const double M = static_cast<double>(ps.count) * ps.grid.N;
    double worst = 0.0;
    std::string where;
    auto test = [&](std::size_t r, std::size_t s, bool bracket) {
      double sum = 0.0, sum2 = 0.0;
      for (std::size_t i = 0; i < ps.count; ++i)
        for (int k = 0; k < ps.grid.N; ++k) {
          auto inc = ps.increment(i, k);
          const double v = bracket ? inc[r] * inc[s] : inc[r];
          sum += v;
          sum2 += v * v;
        }
      const double mean = sum / M;
      const double se = std::sqrt(std::max(sum2 / M - mean * mean, 0.0) / M);
      const double target = bracket && r == s ? dt : 0.0;
      const double z = se > 0 ? std::abs(mean - target) / se : (mean == target ? 0.0 : INFINITY);
      if (z > worst) {
        worst = z;
        where = bracket ? "bracket(" + std::to_string(r) + "," + std::to_string(s) + ")"
                        : "mean(" + std::to_string(r) + ")";
      }
    };
    for (std::size_t r = 0; r < ps.K; ++r) {
      test(r, r, false);
      for (std::size_t s = r; s < ps.K; ++s) test(r, s, true);
    }
    return {"martingale_diagnostics", worst <= 3.0, worst, 3.0, "largest |z| " + fmt(worst) + " at " + where};
  }

  CheckResult feynman_kac() {
    const auto& sol = get_linear();
    const std::vector<double> x0(model.dimension(), 0.0);
    const double pdie = sol.value(0, 0.0, x0);
    const auto g = build_terminal(*cfg.terminal_json, model.dimension());
    const Simulator sim(model, cfg.simulation.eps);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < cfg.verify.npaths; ++i) {
      const Vector x = sim.terminal_state(cfg.simulation.T, cfg.simulation.seed, i);
      const double v = g(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
      s += v;
      s2 += v * v;
    }
    const double M = static_cast<double>(cfg.verify.npaths);
    const double mean = s / M;
    const double se = std::sqrt(std::max(s2 / M - mean * mean, 0.0) / M);
    const double tol = std::max(cfg.verify.fk_rel_tol * std::abs(mean), 3.0 * se);
    return {"feynman_kac", std::abs(pdie - mean) <= tol, std::abs(pdie - mean), tol,
            "pdie " + fmt(pdie) + " mc " + fmt(mean) + " se " + fmt(se)};
  }

  CheckResult clark_ocone() {
    const auto& sol = get_linear();
    const auto& basis = get_basis();
    const auto g = build_terminal(*cfg.terminal_json, model.dimension());
    const Simulator sim(model, cfg.simulation.eps);
    std::vector<int> degrees{1};
    if (basis.max_degree() >= 2) degrees.push_back(2);
    std::vector<std::vector<double>> rms(3);
    const std::size_t count = std::min<std::size_t>(cfg.verify.npaths, 5000);
    for (int level = 0; level < 3; ++level) {
      const TimeGrid grid(cfg.simulation.T, cfg.verify.steps << level);
      const auto ps = simulate_path_set(sim, basis, grid, count, cfg.simulation.seed + 1, cfg.threads);
      for (int D : degrees) rms[level].push_back(clark_ocone_reconstruct(ps, sol, basis, g, D, 0, cfg.threads).rms_error);
    }
    bool ok = true;
    std::string detail;
    for (int level = 0; level < 3; ++level) {
      for (std::size_t d = 0; d < degrees.size(); ++d) {
        detail += (detail.empty() ? "" : " ") + std::string("N") + std::to_string(cfg.verify.steps << level) +
                  "/D" + std::to_string(degrees[d]) + "=" + fmt(rms[level][d]);
        if (level > 0) ok = ok && rms[level][d] < rms[level - 1][d];
        if (d > 0) ok = ok && rms[level][d] < rms[level][d - 1];
      }
    }
    return {"clark_ocone", ok, rms[2].back(), 0.0, detail};
  }

  CheckResult contraction() {
    const auto& ps = get_paths();
    const auto data = bsde_data();
    auto opts = bsde_options();
    const double C = data.driver.lipschitz;
    const double beta = opts.beta >= 0 ? opts.beta : 4 * C * C + 1;
    const auto seq = picard_sequence(data, ps, std::min(opts.max_iterations, 10), opts);
    double worst = 0.0;
    std::string detail;
    for (std::size_t k = 2; k + 1 < seq.size(); ++k) {
      const double den = beta_norm(seq[k], seq[k - 1], beta);
      const double scale = 1.0 + beta_norm(seq[k], seq[0], beta);
      if (den <= 1e-10 * scale) break;
      const double ratio = beta_norm(seq[k + 1], seq[k], beta) / den;
      worst = std::max(worst, ratio);
      detail += (detail.empty() ? "" : " ") + fmt(ratio);
    }
    return {"contraction", worst <= cfg.verify.contraction_max, worst, cfg.verify.contraction_max,
            "ratios " + detail};
  }

  CheckResult stability() {
    const auto& ps = get_paths();
    const auto a = bsde_data();
    const auto opts = bsde_options();
    std::vector<double> lhs;
    for (double s : {1.0, 0.5, 0.25}) {
      BsdeData b = a;
      auto g = a.terminal;
      b.terminal = [g, s](std::span<const double> x) { return g(x) + s; };
      lhs.push_back(stability_check(a, b, ps, opts).lhs);
    }
    const double r1 = lhs[0] / lhs[1], r2 = lhs[1] / lhs[2];
    const bool ok = r1 >= cfg.verify.stability_low && r1 <= cfg.verify.stability_high &&
                    r2 >= cfg.verify.stability_low && r2 <= cfg.verify.stability_high;
    return {"stability", ok, std::max(std::abs(r1 - 4), std::abs(r2 - 4)), 0.0,
            "ratios " + fmt(r1) + " " + fmt(r2)};
  }

  CheckResult martingale_condition() {
    const MarketSpec market = make_market(cfg);
    const Vector res = check_martingale_condition(market.model);
    const double residual = res.cwiseAbs().maxCoeff();
    bool ok = residual < cfg.verify.martingale_tol;
    std::string detail = "residual " + fmt(residual);
    McOptions mo;
    mo.eps = cfg.simulation.eps;
    mo.threads = cfg.threads;
    for (std::size_t i = 0; i < market.model.dimension(); ++i) {
      const auto mc = discounted_stock_mc(market, i, cfg.verify.npaths, cfg.simulation.seed, mo);
      const double S0 = market.S0[static_cast<Eigen::Index>(i)];
      const bool within = std::abs(mc.price - S0) <= 3.0 * mc.stderr_;
      ok = ok && within;
      detail += "; E[e^{-rT}S_" + std::to_string(i) + "(T)] " + fmt(mc.price) + " se " + fmt(mc.stderr_);
    }
    return {"martingale_condition", ok, residual, cfg.verify.martingale_tol, detail};
  }
};

bool applicable(const RunConfig& cfg, const std::string& name, std::string& why) {
  const bool jumps_only = !cfg.model->has_brownian_part();
  if (name == "martingale_diagnostics" || name == "contraction" || name == "stability" ||
      name == "clark_ocone") {
    if (!jumps_only) {
      why = "needs a model without Brownian part";
      return false;
    }
  }
  if (name == "feynman_kac" || name == "clark_ocone") {
    if (!cfg.pdie || !cfg.terminal_json) {
      why = "needs pdie and terminal sections";
      return false;
    }
  }
  if (name == "contraction" || name == "stability") {
    if (!cfg.bsde || !cfg.terminal_json) {
      why = "needs bsde and terminal sections";
      return false;
    }
  }
  if (name == "martingale_condition" && !cfg.pricing) {
    why = "needs a pricing section";
    return false;
  }
  return true;
}

}  // namespace

int cmd_verify(const RunConfig& cfg) {
  static const std::vector<std::string> all{"martingale_diagnostics", "feynman_kac", "clark_ocone",
                                            "contraction", "stability", "martingale_condition"};
  std::vector<std::string> selected;
  std::string why;
  if (cfg.verify.checks.empty()) {
    for (const auto& name : all)
      if (applicable(cfg, name, why)) selected.push_back(name);
  } else {
    for (const auto& name : cfg.verify.checks) {
      if (!applicable(cfg, name, why)) throw ConfigError("/verify/checks", name + ": " + why);
      selected.push_back(name);
    }
  }
  if (selected.empty()) throw ConfigError("/verify", "no applicable checks for this config");

  Battery battery{cfg, *cfg.model, {}, {}, {}};
  json checks = json::array();
  json failures = json::array();
  for (const auto& name : selected) {
    CheckResult r;
    try {
      if (name == "martingale_diagnostics") r = battery.martingale_diagnostics();
      else if (name == "feynman_kac") r = battery.feynman_kac();
      else if (name == "clark_ocone") r = battery.clark_ocone();
      else if (name == "contraction") r = battery.contraction();
      else if (name == "stability") r = battery.stability();
      else r = battery.martingale_condition();
    } catch (const std::exception& e) {
      r = {name, false, NAN, 0.0, std::string("error: ") + e.what()};
    }
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
    json entry{{"name", r.name}, {"passed", r.passed}, {"threshold", r.threshold}, {"detail", r.detail}};
    entry["value"] = std::isfinite(r.value) ? json(r.value) : json(nullptr);
    checks.push_back(entry);
    if (!r.passed) failures.push_back(r.name);
  }
  const auto dir = output_dir(cfg.output.directory);
  write_json(dir / "verify.json",
             {{"passed", failures.empty()}, {"checks", checks}, {"failures", failures},
              {"model_hash", hex64(model_hash(cfg.model_json))}, {"seed", cfg.simulation.seed}});
  return failures.empty() ? kOk : kCheckFailed;
}

}  // namespace levybsde::cli
