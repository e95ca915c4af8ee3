// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: levybsde_acceptance [--cli PATH] [--data DIR]
// [--work DIR] [--only 1,5,11]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "levybsde/bsde.hpp"
#include "levybsde/error.hpp"
#include "levybsde/levy_model.hpp"
#include "levybsde/orthobasis.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/pricing.hpp"
#include "levybsde/simulator.hpp"

namespace fs = std::filesystem;
using namespace levybsde;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!! ") + what;
  }
};

std::string num(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

struct Args {
  std::string cli;
  std::string data = "tests/data";
  std::string work = "acceptance_work";
  std::set<int> only;
};

Args g_args;

using Fn = std::function<double(std::span<const double>)>;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mc_terminal_mean(const Simulator& sim, const Fn& g, double T, std::size_t paths,
                        std::uint64_t seed) {
  long double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const Vector x = sim.terminal_state(T, seed, i);
    const double v = g(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    s += v;
    s2 += static_cast<long double>(v) * v;
  }
  const double M = static_cast<double>(paths);
  const double mean = static_cast<double>(s / M);
  const double var = static_cast<double>(s2 / M) - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / M)};
}

// Fixtures shared by several criteria -------------------------------------

LevyModel margins_fixture() {
  return poisson_copula_with_margins(1.0, 1.0, ClaytonCopulaParams{1.0, 1.0});
}

double nonseparable(std::span<const double> x) {
  return std::tanh(0.5 * (x[0] + x[1])) + 0.5 * std::cos(0.5 * x[0] - 0.3 * x[1]);
}

PdieGrid margins_grid(int steps) {
  return PdieGrid{SpaceGrid({Axis{-4.0, 8.0, 241}, Axis{-4.0, 8.0, 241}}), TimeGrid(1.0, steps)};
}

struct BsdeFixture {
  LevyModel model = margins_fixture();
  std::shared_ptr<const OrthoBasis> basis = std::make_shared<const OrthoBasis>(model, 2);
  Simulator sim{model, 1e-3};
  PathSet paths = simulate_path_set(sim, *basis, TimeGrid(1.0, 16), 20000, 3);
  BsdeData data{mixed_driver(0.25, 0.25), nonseparable, -1};
};

BsdeFixture& bsde_fixture() {
  static BsdeFixture f;
  return f;
}

const GridSolution& margins_linear_solution() {
  static const GridSolution sol =
      solve_linear_pdie(margins_fixture(), {nonseparable}, margins_grid(200));
  return sol;
}

// Criteria -----------------------------------------------------------------

Outcome c1_poisson_degeneracy() {
  Outcome o;
  Vector drift(1);
  drift << -1.0;
  const auto model = LevyModel::from_marginals(drift, {MarginalMeasure::poisson(1.0)}, std::nullopt);
  const OrthoBasis basis(model, 4);
  double worst = 0.0;
  bool pruned = true;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis.index(k).degree() < 2) {
      o.check(basis.kept(k), "degree-1 direction kept");
      continue;
    }
    pruned = pruned && !basis.kept(k);
    worst = std::max(worst, std::abs(basis.norms2()[static_cast<Eigen::Index>(k)]));
  }
  o.check(pruned, "all degree >= 2 directions pruned");
  o.check(worst < 1e-12, "max norm^2 " + num(worst));
  return o;
}

Outcome c2_eq8_constant() {
  Outcome o;
  const ClaytonCopulaParams unit{1.0, 1.0};
  // eta (1 + mu) (l1 l2)^mu / (l1^mu + l2^mu)^(1/mu + 2) by hand:
  // (1,1): 1 * 2 * 1 / 2^3 = 1/4; (2,1): 1 * 2 * 2 / 3^3 = 4/27.
  const double c11 = common_poisson_intensity(1.0, 1.0, unit);
  const double c21 = common_poisson_intensity(2.0, 1.0, unit);
  o.check(c11 == 0.25, "c(1,1) = " + num(c11, 17));
  o.check(std::abs(c21 - 4.0 / 27.0) <= 1e-12, "c(2,1) - 4/27 = " + num(c21 - 4.0 / 27.0, 3));
  const auto model = common_poisson_measure(1.0, 1.0, unit);
  o.check(model.atoms().size() == 1 && model.atoms()[0].intensity == 0.25 &&
              model.atoms()[0].x.isApprox(Vector::Ones(2)),
          "single (1,1) atom carries c");
  return o;
}

Outcome c3_meixner_moment() {
  Outcome o;
  const MeixnerParams p{1.0, 0.0, 1.0, 0.0};
  const double lib = moment(LevyModel::meixner(p), MultiIndex{2});
  // Independent oracle: double-exponential quadrature of x^2 nu(x) written
  // out from the density formula, folded onto (0, inf).
  auto x2nu = [&](double x) {
    const double e = std::exp(p.beta * x / p.alpha), f = std::exp(-p.beta * x / p.alpha);
    return p.delta * x * (e + f) / std::sinh(std::numbers::pi * x / p.alpha);
  };
  boost::math::quadrature::exp_sinh<double> es;
  const double oracle = es.integrate(x2nu, 0.0, std::numeric_limits<double>::infinity());
  // K''(0) by central differences of the cumulant.
  const double h = 1e-4;
  const double kpp = (meixner_cumulant(h, p) - 2 * meixner_cumulant(0.0, p) + meixner_cumulant(-h, p)) / (h * h);
  o.check(std::abs(lib - 0.5) <= 1e-6, "library m2 " + num(lib, 12));
  o.check(std::abs(oracle - 0.5) <= 1e-6, "oracle m2 " + num(oracle, 12));
  o.check(std::abs(lib - oracle) <= 1e-6, "library vs oracle " + num(lib - oracle, 3));
  o.check(std::abs(kpp - 0.5) <= 1e-6, "K''(0) " + num(kpp, 10));
  return o;
}

/// Textbook modified Gram-Schmidt on unit vectors under <u, v> = u' G v.
Matrix mgs_oracle(const Matrix& G) {
  const Eigen::Index m = G.rows();
  Matrix H = Matrix::Identity(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Vector v = Vector::Unit(m, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Vector hj = H.row(j).transpose();
      v -= (v.dot(G * hj) / hj.dot(G * hj)) * hj;
    }
    H.row(k) = v.transpose();
  }
  return H;
}

Outcome c4_gram_schmidt_oracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(5, 15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  bool all_kept = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = size(rng);
    Matrix A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = u(rng);
    const Matrix G = A * A.transpose() / m + 0.5 * Matrix::Identity(m, m);
    const auto res = gram_schmidt(G);
    const Matrix ref = mgs_oracle(G);
    worst = std::max(worst, (res.coeffs - ref).cwiseAbs().maxCoeff());
    for (bool k : res.kept) all_kept = all_kept && k;
  }
  o.check(all_kept, "no spurious pruning");
  o.check(worst <= 1e-10, "max entrywise gap " + num(worst, 3));
  return o;
}

Outcome c5_teugels_diagnostics() {
  Outcome o;
  const auto model = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
  const OrthoBasis basis(model, 3);
  const Simulator sim(model, 1e-3);
  const auto ps = simulate_path_set(sim, basis, TimeGrid(1.0, 4), 100000, 17);
  const double dt = ps.grid.dt();
  const double M = static_cast<double>(ps.count) * ps.grid.N;
  double worst = 0.0;
  int tests = 0;
  for (std::size_t r = 0; r < ps.K; ++r) {
    for (std::size_t s = r; s <= ps.K; ++s) {
      const bool mean_test = s == ps.K;
      long double sum = 0.0, sum2 = 0.0;
      for (std::size_t i = 0; i < ps.count; ++i)
        for (int k = 0; k < ps.grid.N; ++k) {
          auto inc = ps.increment(i, k);
          const double v = mean_test ? inc[r] : inc[r] * inc[s];
          sum += v;
          sum2 += static_cast<long double>(v) * v;
        }
      const double mean = static_cast<double>(sum / M);
      const double se = std::sqrt(std::max(static_cast<double>(sum2 / M) - mean * mean, 0.0) / M);
      const double target = !mean_test && r == s ? dt : 0.0;
      const double z = std::abs(mean - target) / se;
      worst = std::max(worst, z);
      ++tests;
      if (z > 3.0)
        o.check(false, (mean_test ? "mean " : "bracket ") + std::to_string(r) +
                           (mean_test ? "" : "," + std::to_string(s)) + " z=" + num(z, 3));
    }
  }
  o.check(ps.K == 3, "kept directions " + std::to_string(ps.K));
  o.check(worst <= 3.0, std::to_string(tests) + " statistics, max |z| " + num(worst, 3));
  return o;
}

Outcome c6_feynman_kac() {
  Outcome o;
  {
    const auto model = LevyModel::meixner(MeixnerParams{1.0, 0.0, 1.0, 0.0});
    const Fn g = [](std::span<const double> x) { return std::exp(-x[0] * x[0]) + 0.5 * std::tanh(x[0]); };
    PdieGrid grid{SpaceGrid({Axis{-8.0, 8.0, 1601}}), TimeGrid(1.0, 100)};
    std::optional<GridSolution> sol;
    try {
      sol.emplace(solve_linear_pdie(model, {g}, grid));
    } catch (const StepSizeError& e) {
      grid.time = TimeGrid(1.0, e.suggested_steps());
      sol.emplace(solve_linear_pdie(model, {g}, grid));
    }
    const double x0 = 0.0;
    const double pdie = sol->value(0, 0.0, std::span<const double>(&x0, 1));
    const auto mc = mc_terminal_mean(Simulator(model, 1e-3), g, 1.0, 100000, 7);
    const double tol = std::max(0.01 * std::abs(mc.mean), 3 * mc.se);
    o.check(std::abs(pdie - mc.mean) <= tol, "(a) pdie " + num(pdie) + " mc " + num(mc.mean) + " +- " +
                                                 num(mc.se, 2) + " tol " + num(tol, 2));
  }
  {
    const auto model = margins_fixture();
    const auto& sol = margins_linear_solution();
    const double x0[2] = {0.0, 0.0};
    const double pdie = sol.value(0, 0.0, x0);
    const auto mc = mc_terminal_mean(Simulator(model, 1e-3), nonseparable, 1.0, 100000, 7);
    const double tol = std::max(0.01 * std::abs(mc.mean), 3 * mc.se);
    o.check(std::abs(pdie - mc.mean) <= tol, "(b) pdie " + num(pdie) + " mc " + num(mc.mean) + " +- " +
                                                 num(mc.se, 2) + " tol " + num(tol, 2));
  }
  return o;
}

Outcome c7_picard_contraction() {
  Outcome o;
  auto& f = bsde_fixture();
  const double C = f.data.driver.lipschitz;
  const double beta = 4 * C * C + 1;
  o.check(C == 0.5 && beta == 2.0, "C " + num(C) + " beta " + num(beta));
  const auto seq = picard_sequence(f.data, f.paths, 10);
  double worst = 0.0;
  int measured = 0;
  std::string ratios;
  for (std::size_t k = 2; k + 1 < seq.size(); ++k) {
    const double den = beta_norm(seq[k], seq[k - 1], beta);
    if (den <= 1e-10 * (1.0 + beta_norm(seq[k], seq[0], beta))) break;
    const double ratio = beta_norm(seq[k + 1], seq[k], beta) / den;
    worst = std::max(worst, ratio);
    ratios += (ratios.empty() ? "" : " ") + num(ratio, 3);
    ++measured;
  }
  o.check(measured >= 3, std::to_string(measured) + " ratios measured");
  o.check(worst <= 0.65, "ratios " + ratios);
  return o;
}

Outcome c8_stability_scaling() {
  Outcome o;
  auto& f = bsde_fixture();
  std::vector<double> lhs;
  for (double s : {1.0, 0.5, 0.25}) {
    BsdeData b = f.data;
    b.terminal = [s](std::span<const double> x) { return nonseparable(x) + s; };
    lhs.push_back(stability_check(f.data, b, f.paths).lhs);
  }
  for (int i = 0; i < 2; ++i) {
    const double r = lhs[i] / lhs[i + 1];
    o.check(r >= 3.4 && r <= 4.6, "lhs ratio " + num(r, 4));
  }
  return o;
}

Outcome c9_prop4_consistency() {
  Outcome o;
  auto& f = bsde_fixture();
  const auto bsde = solve_bsde(f.data, f.paths);
  const auto nl = solve_nonlinear_pdie(f.model, {nonseparable}, f.data.driver, f.basis, margins_grid(400));
  const auto& ps = f.paths;
  std::vector<double> per_path(ps.count);
  long double xi2 = 0.0;
  for (std::size_t i = 0; i < ps.count; ++i) {
    double acc = 0.0;
    for (int k = 0; k <= ps.grid.N; ++k) {
      const double e = nl.value(0, ps.grid.t(k), ps.state(i, k)) - bsde.y(k, i);
      acc += e * e;
    }
    per_path[i] = acc / (ps.grid.N + 1);
    const double xi = nonseparable(ps.state(i, ps.grid.N));
    xi2 += xi * xi;
  }
  const double P = static_cast<double>(ps.count);
  double m = 0.0, v = 0.0;
  for (double e : per_path) m += e;
  m /= P;
  for (double e : per_path) v += (e - m) * (e - m);
  v /= P - 1;
  const double rms = std::sqrt(m);
  const double se = std::sqrt(v / P) / (2 * rms);
  const double scale = std::sqrt(static_cast<double>(xi2) / P);
  const double tol = std::max(0.02 * scale, 3 * se);
  o.check(rms <= tol, "rms " + num(rms, 4) + " scale " + num(scale, 4) + " tol " + num(tol, 3) +
                          " (Y0 " + num(bsde.y(0, 0)) + ", theta0 " + num(nl.value(0, 0.0, ps.state(0, 0))) + ")");
  return o;
}

Outcome c10_clark_ocone() {
  Outcome o;
  const auto model = margins_fixture();
  const OrthoBasis basis(model, 2);
  const Simulator sim(model, 1e-3);
  const auto& sol = margins_linear_solution();
  double rms[3][2];
  const int steps[3] = {8, 16, 32};
  std::string table;
  for (int l = 0; l < 3; ++l) {
    const auto ps = simulate_path_set(sim, basis, TimeGrid(1.0, steps[l]), 5000, 5);
    for (int D = 1; D <= 2; ++D) {
      rms[l][D - 1] = clark_ocone_reconstruct(ps, sol, basis, nonseparable, D).rms_error;
      table += (table.empty() ? "" : " ") + std::string("N") + std::to_string(steps[l]) + "/D" +
               std::to_string(D) + "=" + num(rms[l][D - 1], 4);
    }
  }
  bool dt_trend = true, d_trend = true;
  for (int l = 0; l < 3; ++l) {
    d_trend = d_trend && rms[l][1] < rms[l][0];
    if (l > 0)
      for (int d = 0; d < 2; ++d) dt_trend = dt_trend && rms[l][d] < rms[l - 1][d];
  }
  o.check(dt_trend, "decreasing as dt halves");
  o.check(d_trend, "decreasing from D=1 to D=2");
  o.detail += " [" + table + "]";
  return o;
}

Outcome c11_pricing() {
  Outcome o;
  MarketSpec market{LevyModel::meixner(MeixnerParams{0.5, 0.0, 1.0, 0.0}), Vector::Constant(1, 100.0), 0.05, 1.0};
  market.model = market.model.with_drift(risk_neutral_drift(market.model));
  const double residual = std::abs(check_martingale_condition(market.model)[0]);
  o.check(residual < 1e-6, "martingale residual " + num(residual, 3));

  const double S0 = 100.0, K = 100.0;
  const double forward = S0 - K * std::exp(-market.r * market.T);
  PideGridSpec gs;
  gs.half_width = 4.0;
  gs.nodes = 1601;
  const auto call = price_pide(market, Payoff::call(0, K), gs);
  const auto put = price_pide(market, Payoff::put(0, K), gs);
  const auto mc = price_mc(market, {Payoff::call(0, K), Payoff::put(0, K)}, 1000000, 20240611);

  const double gap = std::abs(call.price - mc[0].price);
  o.check(gap <= 0.01 * mc[0].price, "pide " + num(call.price) + " mc " + num(mc[0].price) + " +- " +
                                         num(mc[0].stderr_, 2) + " (gap " + num(100 * gap / mc[0].price, 3) + "%)");
  const double pide_parity = std::abs(call.price - put.price - forward);
  const double mc_parity = std::abs(mc[0].price - mc[1].price - forward);
  o.check(pide_parity < 0.005 * S0, "pide parity " + num(pide_parity, 3));
  o.check(mc_parity < 0.005 * S0, "mc parity " + num(mc_parity, 3));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome c12_reproducibility() {
  Outcome o;
  if (g_args.cli.empty() || !fs::exists(g_args.cli)) {
    o.check(false, "CLI binary not found (pass --cli)");
    return o;
  }
  struct Run {
    std::string args;
    std::string config;
  };
  const std::vector<Run> runs{
      {"moments", "common_poisson.json"},
      {"orthobasis", "margins2d.json"},
      {"simulate", "meixner1d.json"},
      {"solve bsde", "margins2d.json"},
      {"solve linear-pdie", "meixner1d.json"},
      {"solve nonlinear-pdie", "margins2d.json"},
      {"price mc", "meixner_call.json"},
      {"price pide", "meixner_call.json"},
      {"verify", "margins2d.json"},
  };
  const fs::path root = fs::path(g_args.work) / "reproducibility";
  fs::remove_all(root);
  fs::create_directories(root);
  int compared = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    fs::path dirs[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      dirs[rep] = root / ("run" + std::to_string(r)) / ("rep" + std::to_string(rep));
      const std::string cmd = "\"" + g_args.cli + "\" " + runs[r].args + " --config \"" +
                              (fs::path(g_args.data) / runs[r].config).string() + "\" --seed 99 --out \"" +
                              dirs[rep].string() + "\" --format csv > \"" +
                              (root / ("run" + std::to_string(r) + ".log")).string() + "\" 2>&1";
      if (std::system(cmd.c_str()) != 0) ran = false;
    }
    if (!ran) {
      o.check(false, runs[r].args + " exited nonzero");
      continue;
    }
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dirs[0])) files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    std::size_t other = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
    bool same = !files.empty() && other == files.size();
    for (const auto& name : files) same = same && slurp(dirs[0] / name) == slurp(dirs[1] / name);
    compared += static_cast<int>(files.size());
    if (!same) o.check(false, runs[r].args + " differs between runs");
  }
  o.check(o.pass, std::to_string(runs.size()) + " commands, " + std::to_string(compared) + " files byte-identical");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
    if (a == "--cli") g_args.cli = next();
    else if (a == "--data") g_args.data = next();
    else if (a == "--work") g_args.work = next();
    else if (a == "--only") {
      std::stringstream ss(next());
      std::string tok;
      while (std::getline(ss, tok, ',')) g_args.only.insert(std::stoi(tok));
    } else {
      std::cerr << "unknown argument " << a << "\n";
      return 2;
    }
  }
  fs::create_directories(g_args.work);

  const Criterion criteria[] = {
      {1, "Poisson degeneracy", 1, c1_poisson_degeneracy},
      {2, "common-jump intensity", 1, c2_eq8_constant},
      {3, "Meixner moment link", 5, c3_meixner_moment},
      {4, "Gram-Schmidt oracle", 10, c4_gram_schmidt_oracle},
      {5, "Teugels martingale diagnostics", 120, c5_teugels_diagnostics},
      {6, "Feynman-Kac agreement", 360, c6_feynman_kac},
      {7, "Picard contraction", 120, c7_picard_contraction},
      {8, "stability scaling", 180, c8_stability_scaling},
      {9, "PDIE/BSDE consistency", 300, c9_prop4_consistency},
      {10, "Clark-Ocone reconstruction", 180, c10_clark_ocone},
      {11, "pricing cross-check", 300, c11_pricing},
      {12, "reproducibility", 120, c12_reproducibility},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!g_args.only.empty() && !g_args.only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) out.check(false, "runtime " + num(secs, 3) + " s over " + num(c.budget_seconds) + " s");
    if (!out.pass) ++failed;
    std::printf("%s  %2d  %-32s %8.2f s  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s: %d criteria failed\n", failed ? "FAILED" : "ALL PASSED", failed);
  return failed ? 1 : 0;
}
