#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "levybsde/error.hpp"
#include "levybsde/parallel.hpp"

using namespace levybsde;
using namespace levybsde::cli;

int main(int argc, char** argv) {
  CLI::App app{"Teugels-martingale BSDE / PDIE toolkit for multidimensional Levy models", "levybsde"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string format;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Overrides simulation.seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker cap")->check(CLI::NonNegativeNumber);
  auto* out_opt = app.add_option("--out", out, "Output directory, overrides output.directory");
  auto* format_opt = app.add_option("--format", format, "Output format, overrides output.formats")
                         ->check(CLI::IsMember({"csv", "json"}));

  auto* moments = app.add_subcommand("moments", "m_p for 1 <= |p| <= 2D in graded lex order");
  auto* orthobasis = app.add_subcommand("orthobasis", "Gram-Schmidt basis coefficients and norms");
  auto* simulate = app.add_subcommand("simulate", "Seeded path dump");
  auto* solve = app.add_subcommand("solve", "linear-pdie | nonlinear-pdie | bsde");
  std::string which;
  solve->add_option("which", which)->required()->check(CLI::IsMember({"linear-pdie", "nonlinear-pdie", "bsde"}));
  auto* price = app.add_subcommand("price", "mc | pide");
  std::string method;
  price->add_option("method", method)->required()->check(CLI::IsMember({"mc", "pide"}));
  auto* verify = app.add_subcommand("verify", "Cross-validation battery; exit 1 on any failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (*seed_opt) cfg.simulation.seed = seed;
    if (*threads_opt) cfg.threads = threads;
    if (*out_opt) cfg.output.directory = out;
    if (*format_opt) cfg.output.formats = {format};
    if (cfg.threads > 0) set_default_threads(cfg.threads);

    if (*moments) return cmd_moments(cfg);
    if (*orthobasis) return cmd_orthobasis(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*solve) return cmd_solve(cfg, which);
    if (*price) return cmd_price(cfg, method);
    if (*verify) return cmd_verify(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
