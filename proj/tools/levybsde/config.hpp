#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "levybsde/bsde.hpp"
#include "levybsde/driver.hpp"
#include "levybsde/levy_model.hpp"
#include "levybsde/pdie.hpp"
#include "levybsde/pricing.hpp"

namespace levybsde::cli {

using nlohmann::json;

/// Schema or parse failure. `pointer` is the JSON pointer of the offending
/// value; parse_config prefixes the message with its line when it can.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer)), detail_(what) {}
  const std::string& pointer() const noexcept { return pointer_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string pointer_;
  std::string detail_;
};

struct BasisConfig {
  int D = 2;
  double tol = 1e-12;
};

struct SimulationConfig {
  double T = 1.0;
  double eps = 1e-3;
  std::size_t npaths = 1000;
  std::uint64_t seed = 1;
  int steps = 16;
};

struct PdieConfig {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> nodes;
  int steps = 0;  // 0: smallest stable count
  bool cfl_override = false;
  bool implicit_driver = false;
  int export_stride = 0;  // 0: t = 0 and t = T only
};

struct BsdeConfig {
  json driver = json{{"id", "zero"}};
  int D = -1;
  double picard_tol = 1e-4;
  int max_iterations = 25;
  int regression_degree = 2;
  double beta = -1.0;
  bool allow_rank_deficient = true;
};

struct PricingConfig {
  std::vector<double> S0;
  double r = 0.0;
  double T = 1.0;
  json payoff;
  bool risk_neutral_drift = true;
  double half_width = 4.0;
  int nodes = 801;
  int steps = 0;
  std::size_t npaths = 100000;
};

struct VerifyConfig {
  std::vector<std::string> checks;  // empty: every applicable check
  std::size_t npaths = 20000;
  int steps = 8;
  double fk_rel_tol = 0.01;
  double contraction_max = 0.65;
  double stability_low = 3.4;
  double stability_high = 4.6;
  double martingale_tol = 1e-6;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

struct RunConfig {
  json model_json;
  std::optional<LevyModel> model;
  BasisConfig basis;
  SimulationConfig simulation;
  std::optional<PdieConfig> pdie;
  std::optional<json> terminal_json;
  std::optional<BsdeConfig> bsde;
  std::optional<PricingConfig> pricing;
  VerifyConfig verify;
  OutputConfig output;
  int threads = 0;

  bool wants(const std::string& format) const;
};

/// Parses and validates the whole file before anything runs. Unknown keys
/// are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

LevyModel build_model(const json& spec);
TerminalFunction build_terminal(const json& spec, std::size_t n);
DriverFunction build_driver(const json& spec);
Payoff build_payoff(const json& spec, std::size_t n);

/// FNV-1a 64 of the canonical dump of the model section.
std::uint64_t model_hash(const json& model_json);

PdieGrid make_pdie_grid(const PdieConfig& cfg, double T, std::size_t n, int steps);

}  // namespace levybsde::cli
