#include "commands.hpp"

#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>

#include "levybsde/bsde.hpp"
#include "levybsde/multi_index.hpp"
#include "levybsde/orthobasis.hpp"
#include "levybsde/parallel.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/pricing.hpp"
#include "levybsde/simulator.hpp"
#include "output.hpp"

namespace levybsde::cli {

namespace {

std::string index_label(const MultiIndex& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + std::to_string(p[i]);
  return s;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string vec_text(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt(v[i]);
  return s;
}

const LevyModel& model_of(const RunConfig& cfg) { return *cfg.model; }

TerminalFunction require_terminal(const RunConfig& cfg) {
  if (!cfg.terminal_json) throw ConfigError("/terminal", "required for this command");
  return build_terminal(*cfg.terminal_json, model_of(cfg).dimension());
}

void export_grid_solution(const RunConfig& cfg, const GridSolution& sol, const char* method) {
  const auto dir = output_dir(cfg.output.directory);
  const auto& space = sol.space();
  const int N = sol.time().N;
  const std::size_t n = space.dimension();
  const int stride = cfg.pdie->export_stride > 0 ? cfg.pdie->export_stride : N;
  std::vector<int> slices;
  for (int j = 0; j <= N; j += stride) slices.push_back(j);
  if (slices.back() != N) slices.push_back(N);

  if (cfg.wants("csv")) {
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
    header.insert(header.end(), {"k", "theta"});
    CsvFile csv(dir / "solution.csv", header,
                {std::string("method=") + method, "steps=" + std::to_string(N)});
    std::vector<std::string> cells(n + 3);
    for (int j : slices) {
      for (std::size_t k = 0; k < sol.components(); ++k) {
        auto values = sol.slice(j, k);
        for (std::size_t f = 0; f < space.size(); ++f) {
          const Vector x = space.node(f);
          cells[0] = fmt(sol.time().t(j));
          for (std::size_t i = 0; i < n; ++i) cells[1 + i] = fmt(x[static_cast<Eigen::Index>(i)]);
          cells[n + 1] = std::to_string(k);
          cells[n + 2] = fmt(values[f]);
          csv.row(cells);
        }
      }
    }
    csv.close();
  }
  if (cfg.wants("json")) {
    json out;
    out["method"] = method;
    out["steps"] = N;
    json axes = json::array();
    for (const auto& a : space.axes()) axes.push_back({{"lower", a.lower}, {"upper", a.upper}, {"nodes", a.nodes}});
    out["axes"] = axes;
    json sl = json::array();
    for (int j : slices) {
      auto values = sol.slice(j, 0);
      sl.push_back({{"t", sol.time().t(j)}, {"theta", std::vector<double>(values.begin(), values.end())}});
    }
    out["slices"] = sl;
    write_json(dir / "solution.json", out);
  }
}

double value_at_origin(const GridSolution& sol) {
  const std::vector<double> x0(sol.space().dimension(), 0.0);
  return sol.value(0, 0.0, x0);
}

}  // namespace

MarketSpec make_market(const RunConfig& cfg) {
  if (!cfg.pricing) throw ConfigError("/pricing", "required for this command");
  const auto& p = *cfg.pricing;
  LevyModel model = model_of(cfg);
  if (p.risk_neutral_drift) model = model.with_drift(risk_neutral_drift(model));
  MarketSpec m{model, Eigen::Map<const Vector>(p.S0.data(), static_cast<Eigen::Index>(p.S0.size())), p.r, p.T};
  m.validate();
  return m;
}

int cmd_moments(const RunConfig& cfg) {
  const auto& model = model_of(cfg);
  auto indices = graded_lex_enumerate(model.dimension(), 2 * cfg.basis.D);
  std::vector<std::string> preamble;
  if (!has_finite_variation(model)) {
    // m_p with |p| = 1 does not exist for infinite-variation jumps.
    std::erase_if(indices, [](const MultiIndex& p) { return p.degree() == 1; });
    preamble.push_back("first_moments=omitted (infinite variation)");
  }
  const auto m = moments(model, indices);
  const auto dir = output_dir(cfg.output.directory);
  if (cfg.wants("csv")) {
    CsvFile csv(dir / "moments.csv", {"degree", "p", "m"}, preamble);
    for (std::size_t k = 0; k < indices.size(); ++k)
      csv.row({std::to_string(indices[k].degree()), index_label(indices[k]), fmt(m[k])});
    csv.close();
  }
  if (cfg.wants("json")) {
    json a = json::array();
    for (std::size_t k = 0; k < indices.size(); ++k)
      a.push_back({{"p", indices[k].parts()}, {"degree", indices[k].degree()}, {"m", m[k]}});
    write_json(dir / "moments.json", a);
  }
  return kOk;
}

int cmd_orthobasis(const RunConfig& cfg) {
  const OrthoBasis basis(model_of(cfg), cfg.basis.D, cfg.basis.tol);
  const auto dir = output_dir(cfg.output.directory);
  const auto& C = basis.coefficients();
  if (cfg.wants("csv")) {
    CsvFile csv(dir / "basis.csv", {"degree", "p", "q", "c_q"});
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (std::size_t q = 0; q <= k; ++q) {
        const double c = C(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q));
        if (c != 0.0 || q == k)
          csv.row({std::to_string(basis.index(k).degree()), index_label(basis.index(k)),
                   index_label(basis.index(q)), fmt(c)});
      }
    csv.close();
    CsvFile norms(dir / "basis_norms.csv", {"degree", "p", "norm2", "kept"});
    for (std::size_t k = 0; k < basis.size(); ++k)
      norms.row({std::to_string(basis.index(k).degree()), index_label(basis.index(k)),
                 fmt(basis.norms2()[static_cast<Eigen::Index>(k)]), basis.kept(k) ? "1" : "0"});
    norms.close();
  }
  if (cfg.wants("json")) {
    json a = json::array();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      json coeffs = json::array();
      for (std::size_t q = 0; q <= k; ++q)
        coeffs.push_back({{"q", basis.index(q).parts()},
                          {"c", C(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q))}});
      a.push_back({{"p", basis.index(k).parts()},
                   {"degree", basis.index(k).degree()},
                   {"norm2", basis.norms2()[static_cast<Eigen::Index>(k)]},
                   {"kept", static_cast<bool>(basis.kept(k))},
                   {"coefficients", coeffs}});
    }
    write_json(dir / "basis.json", a);
  }
  std::cout << "kept " << basis.kept_count() << " of " << basis.size() << " directions\n";
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto& sc = cfg.simulation;
  const Simulator sim(model_of(cfg), sc.eps);
  const auto dir = output_dir(cfg.output.directory);
  const std::size_t n = model_of(cfg).dimension();
  std::vector<JumpPath> paths(sc.npaths);
  parallel_for(sc.npaths, cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) sim.fill(paths[i], sc.T, sc.seed, i);
  });
  if (cfg.wants("csv")) {
    CsvFile csv(dir / "paths.csv", {"path_id", "time", "dim", "jump_size"},
                {"seed=" + std::to_string(sc.seed), "eps=" + fmt(sc.eps), "T=" + fmt(sc.T),
                 "npaths=" + std::to_string(sc.npaths), "drift=" + vec_text(sim.effective_drift())});
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (std::size_t j = 0; j < paths[p].jump_count(); ++j) {
        auto y = paths[p].jump(j);
        for (std::size_t i = 0; i < n; ++i)
          csv.row({std::to_string(p), fmt(paths[p].times[j]), std::to_string(i), fmt(y[i])});
      }
    csv.close();
  }
  if (cfg.wants("json")) {
    json out{{"seed", sc.seed}, {"eps", sc.eps}, {"T", sc.T}, {"drift", vec_json(sim.effective_drift())}};
    json a = json::array();
    for (const auto& path : paths) a.push_back({{"times", path.times}, {"jumps", path.jumps}});
    out["paths"] = a;
    write_json(dir / "paths.json", out);
  }
  return kOk;
}

int cmd_solve(const RunConfig& cfg, const std::string& which) {
  const auto& model = model_of(cfg);
  const auto g = require_terminal(cfg);
  const double T = cfg.simulation.T;

  if (which == "linear-pdie" || which == "nonlinear-pdie") {
    if (!cfg.pdie) throw ConfigError("/pdie", "required for " + which);
    PdieOptions opts;
    opts.cfl_override = cfg.pdie->cfl_override;
    opts.implicit_driver = cfg.pdie->implicit_driver;
    opts.basis_degree = cfg.basis.D;
    opts.threads = cfg.threads;
    const std::size_t n = model.dimension();
    std::optional<GridSolution> sol;
    if (which == "linear-pdie") {
      sol.emplace(with_stable_steps(cfg.pdie->steps, [&](int steps) {
        return solve_linear_pdie(model, {g}, make_pdie_grid(*cfg.pdie, T, n, steps), opts);
      }));
    } else {
      if (!cfg.bsde) throw ConfigError("/bsde", "driver section required for nonlinear-pdie");
      const auto driver = build_driver(cfg.bsde->driver);
      auto basis = std::make_shared<const OrthoBasis>(model, cfg.basis.D, cfg.basis.tol);
      sol.emplace(with_stable_steps(cfg.pdie->steps, [&](int steps) {
        return solve_nonlinear_pdie(model, {g}, driver, basis, make_pdie_grid(*cfg.pdie, T, n, steps), opts);
      }));
    }
    export_grid_solution(cfg, *sol, which.c_str());
    std::cout << "theta(0, 0) = " << fmt(value_at_origin(*sol)) << " (" << sol->time().N << " steps)\n";
    return kOk;
  }

  if (which != "bsde") throw ConfigError("solve", "expected linear-pdie, nonlinear-pdie or bsde");
  const BsdeConfig bc = cfg.bsde.value_or(BsdeConfig{});
  const Simulator sim(model, cfg.simulation.eps);
  const OrthoBasis basis(model, cfg.basis.D, cfg.basis.tol);
  const TimeGrid grid(T, cfg.simulation.steps);
  const auto ps = simulate_path_set(sim, basis, grid, cfg.simulation.npaths, cfg.simulation.seed, cfg.threads);
  BsdeData data{build_driver(bc.driver), g, bc.D};
  BsdeOptions opts;
  opts.regression_degree = bc.regression_degree;
  opts.max_iterations = bc.max_iterations;
  opts.tolerance = bc.picard_tol;
  opts.beta = bc.beta;
  opts.allow_rank_deficient = bc.allow_rank_deficient;
  opts.threads = cfg.threads;
  const auto sol = solve_bsde(data, ps, opts);

  const auto dir = output_dir(cfg.output.directory);
  std::vector<std::string> zcols;
  for (auto pos : ps.positions) zcols.push_back("z_mean_" + index_label(basis.index(pos)));
  if (cfg.wants("csv")) {
    std::vector<std::string> header{"t", "y_mean", "y_sd"};
    header.insert(header.end(), zcols.begin(), zcols.end());
    CsvFile csv(dir / "solution.csv", header,
                {"method=bsde", "seed=" + std::to_string(ps.seed), "paths=" + std::to_string(ps.count),
                 "iterations=" + std::to_string(sol.iterations),
                 "dropped_regressors=" + std::to_string(sol.dropped_regressors)});
    for (int k = 0; k <= grid.N; ++k) {
      std::vector<std::string> cells{fmt(grid.t(k)), fmt(sol.mean_y(k)), fmt(sol.sd_y(k))};
      for (std::size_t r = 0; r < ps.K; ++r) cells.push_back(k < grid.N ? fmt(sol.mean_z(k, r)) : "");
      csv.row(cells);
    }
    csv.close();
    CsvFile diag(dir / "diagnostics.csv", {"iteration", "residual"});
    for (std::size_t i = 0; i < sol.residuals.size(); ++i)
      diag.row({std::to_string(i + 1), fmt(sol.residuals[i])});
    diag.close();
  }
  if (cfg.wants("json")) {
    json rows = json::array();
    for (int k = 0; k <= grid.N; ++k) {
      json z = json::array();
      if (k < grid.N)
        for (std::size_t r = 0; r < ps.K; ++r) z.push_back(sol.mean_z(k, r));
      rows.push_back({{"t", grid.t(k)}, {"y_mean", sol.mean_y(k)}, {"y_sd", sol.sd_y(k)}, {"z_mean", z}});
    }
    write_json(dir / "solution.json", {{"method", "bsde"}, {"seed", ps.seed}, {"paths", ps.count},
                                      {"iterations", sol.iterations}, {"residuals", sol.residuals},
                                      {"rows", rows}});
  }
  std::cout << "Y(0) = " << fmt(sol.mean_y(0)) << " after " << sol.iterations << " Picard iterations\n";
  return kOk;
}

int cmd_price(const RunConfig& cfg, const std::string& method) {
  const MarketSpec market = make_market(cfg);
  const auto& pc = *cfg.pricing;
  const Payoff payoff = build_payoff(pc.payoff, market.model.dimension());
  const auto dir = output_dir(cfg.output.directory);
  json report{{"method", method}, {"model_hash", hex64(model_hash(cfg.model_json))}};

  if (method == "mc") {
    McOptions opts;
    opts.eps = cfg.simulation.eps;
    opts.threads = cfg.threads;
    const auto res = price_mc(market, payoff, pc.npaths, cfg.simulation.seed, opts);
    report["price"] = res.price;
    report["stderr"] = res.stderr_;
    report["seed"] = res.seed;
    report["grid"] = {{"paths", res.paths}, {"eps", opts.eps}};
    std::cout << "price " << fmt(res.price) << " +- " << fmt(res.stderr_) << "\n";
  } else if (method == "pide") {
    PideGridSpec gs;
    gs.half_width = pc.half_width;
    gs.nodes = pc.nodes;
    gs.steps = pc.steps;
    gs.pdie.threads = cfg.threads;
    const auto res = price_pide(market, payoff, gs);
    report["price"] = res.price;
    report["stderr"] = 0.0;
    report["seed"] = nullptr;
    report["grid"] = {{"half_width", gs.half_width}, {"nodes", gs.nodes}, {"steps", res.steps}};
    if (cfg.wants("csv") && market.model.dimension() == 1) {
      CsvFile csv(dir / "price_surface.csv", {"t", "S", "V"});
      const auto& ax = res.solution->space().axis(0);
      for (int q = 0; q <= 10; ++q) {
        const double t = market.T * q / 10.0;
        for (int i = 0; i < ax.nodes; ++i) {
          const double S = market.S0[0] * std::exp(ax.lower + ax.h() * i);
          const double s[1] = {S};
          csv.row({fmt(t), fmt(S), fmt(res.value(t, s))});
        }
      }
      csv.close();
    }
    std::cout << "price " << fmt(res.price) << " (" << res.steps << " steps)\n";
  } else {
    throw ConfigError("price", "expected mc or pide");
  }
  write_json(dir / "price.json", report);
  return kOk;
}

}  // namespace levybsde::cli
