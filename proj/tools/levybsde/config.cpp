#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "levybsde/error.hpp"

namespace levybsde::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_object(obj, path);
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      throw ConfigError(join(path, key), "unknown key (allowed: " + list + ")");
    }
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& path, const char* key, double def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "not finite");
  return x;
}

double required_number(const json& obj, const std::string& path, const char* key) {
  if (!find(obj, key)) throw ConfigError(join(path, key), "required");
  return number(obj, path, key, 0.0);
}

long long integer(const json& obj, const std::string& path, const char* key, long long def,
                  long long lo, long long hi) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  const long long x = v->get<long long>();
  if (x < lo || x > hi)
    throw ConfigError(join(path, key),
                      "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

bool boolean(const json& obj, const std::string& path, const char* key, bool def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::string string(const json& obj, const std::string& path, const char* key,
                   const std::string& def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> numbers_of_size(const json& v, const std::string& path, std::size_t n) {
  auto out = numbers(v, path);
  if (out.size() != n)
    throw ConfigError(path, "expected " + std::to_string(n) + " entries, got " +
                                std::to_string(out.size()));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MeixnerParams meixner_params(const json& j, const std::string& path) {
  check_keys(j, path, {"alpha", "beta", "delta", "mu"});
  MeixnerParams p;
  p.alpha = number(j, path, "alpha", 1.0);
  p.beta = number(j, path, "beta", 0.0);
  p.delta = number(j, path, "delta", 1.0);
  p.mu = number(j, path, "mu", 0.0);
  return p;
}

ClaytonCopulaParams copula_params(const json& j, const std::string& path) {
  check_keys(j, path, {"mu", "eta"});
  ClaytonCopulaParams c;
  c.mu = number(j, path, "mu", 1.0);
  c.eta = number(j, path, "eta", 1.0);
  return c;
}

/// Line of the first `"key":` in the text, 0 when not found.
int line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = 0;
  while ((pos = text.find(quoted, pos)) != std::string::npos) {
    std::size_t q = pos + quoted.size();
    while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
    if (q < text.size() && text[q] == ':')
      return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
    pos = q;
  }
  return 0;
}

int line_of_pointer(const std::string& text, const std::string& pointer) {
  std::string key = pointer.substr(pointer.find_last_of('/') + 1);
  if (key.empty()) return 0;
  if (std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const std::string parent = pointer.substr(0, pointer.find_last_of('/'));
    return parent.empty() ? 0 : line_of_pointer(text, parent);
  }
  return line_of_key(text, key);
}

PdieConfig parse_pdie(const json& j, std::size_t n) {
  const std::string path = "/pdie";
  check_keys(j, path,
             {"lower", "upper", "nodes", "steps", "cfl_override", "implicit_driver", "export_stride"});
  PdieConfig c;
  if (!find(j, "lower") || !find(j, "upper")) throw ConfigError(path, "lower and upper are required");
  c.lower = numbers_of_size(j["lower"], path + "/lower", n);
  c.upper = numbers_of_size(j["upper"], path + "/upper", n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(c.upper[i] > c.lower[i])) throw ConfigError(path + "/upper", "upper must exceed lower");
  if (const json* v = find(j, "nodes")) {
    if (v->is_number_integer()) {
      c.nodes.assign(n, static_cast<int>(integer(j, path, "nodes", 101, 3, 100000)));
    } else {
      for (double x : numbers_of_size(*v, path + "/nodes", n)) {
        if (x != std::floor(x) || x < 3) throw ConfigError(path + "/nodes", "integers >= 3 expected");
        c.nodes.push_back(static_cast<int>(x));
      }
    }
  } else {
    c.nodes.assign(n, 101);
  }
  c.steps = static_cast<int>(integer(j, path, "steps", 0, 0, 10000000));
  c.cfl_override = boolean(j, path, "cfl_override", false);
  c.implicit_driver = boolean(j, path, "implicit_driver", false);
  c.export_stride = static_cast<int>(integer(j, path, "export_stride", 0, 0, 10000000));
  return c;
}

BsdeConfig parse_bsde(const json& j) {
  const std::string path = "/bsde";
  check_keys(j, path, {"driver", "D", "picard_tol", "max_iterations", "regression_degree", "beta",
                       "allow_rank_deficient"});
  BsdeConfig c;
  if (const json* d = find(j, "driver")) {
    c.driver = *d;
    build_driver(c.driver);
  }
  c.D = static_cast<int>(integer(j, path, "D", -1, -1, 8));
  c.picard_tol = number(j, path, "picard_tol", 1e-4);
  if (!(c.picard_tol > 0)) throw ConfigError(path + "/picard_tol", "must be positive");
  c.max_iterations = static_cast<int>(integer(j, path, "max_iterations", 25, 1, 10000));
  c.regression_degree = static_cast<int>(integer(j, path, "regression_degree", 2, 0, 6));
  c.beta = number(j, path, "beta", -1.0);
  c.allow_rank_deficient = boolean(j, path, "allow_rank_deficient", true);
  return c;
}

PricingConfig parse_pricing(const json& j, std::size_t n) {
  const std::string path = "/pricing";
  check_keys(j, path, {"S0", "r", "T", "payoff", "risk_neutral_drift", "half_width", "nodes",
                       "steps", "npaths"});
  PricingConfig c;
  if (!find(j, "S0")) throw ConfigError(path + "/S0", "required");
  c.S0 = numbers_of_size(j["S0"], path + "/S0", n);
  for (double s : c.S0)
    if (!(s > 0)) throw ConfigError(path + "/S0", "spot prices must be positive");
  c.r = number(j, path, "r", 0.0);
  c.T = number(j, path, "T", 1.0);
  if (!(c.T > 0)) throw ConfigError(path + "/T", "must be positive");
  if (!find(j, "payoff")) throw ConfigError(path + "/payoff", "required");
  c.payoff = j["payoff"];
  build_payoff(c.payoff, n);
  c.risk_neutral_drift = boolean(j, path, "risk_neutral_drift", true);
  c.half_width = number(j, path, "half_width", 4.0);
  if (!(c.half_width > 0)) throw ConfigError(path + "/half_width", "must be positive");
  c.nodes = static_cast<int>(integer(j, path, "nodes", 801, 3, 1000000));
  c.steps = static_cast<int>(integer(j, path, "steps", 0, 0, 10000000));
  c.npaths = static_cast<std::size_t>(integer(j, path, "npaths", 100000, 1, 1000000000));
  return c;
}

VerifyConfig parse_verify(const json& j) {
  const std::string path = "/verify";
  check_keys(j, path, {"checks", "npaths", "steps", "fk_rel_tol", "contraction_max",
                       "stability_low", "stability_high", "martingale_tol"});
  VerifyConfig c;
  if (const json* v = find(j, "checks")) {
    if (!v->is_array()) throw ConfigError(path + "/checks", "expected an array of names");
    static const char* known[] = {"martingale_diagnostics", "feynman_kac", "clark_ocone",
                                  "contraction", "stability", "martingale_condition"};
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = path + "/checks/" + std::to_string(i);
      if (!(*v)[i].is_string()) throw ConfigError(p, "expected a string");
      const auto name = (*v)[i].get<std::string>();
      if (std::find(std::begin(known), std::end(known), name) == std::end(known))
        throw ConfigError(p, "unknown check '" + name + "'");
      c.checks.push_back(name);
    }
  }
  c.npaths = static_cast<std::size_t>(integer(j, path, "npaths", 20000, 100, 100000000));
  c.steps = static_cast<int>(integer(j, path, "steps", 8, 2, 100000));
  c.fk_rel_tol = number(j, path, "fk_rel_tol", 0.01);
  c.contraction_max = number(j, path, "contraction_max", 0.65);
  c.stability_low = number(j, path, "stability_low", 3.4);
  c.stability_high = number(j, path, "stability_high", 4.6);
  c.martingale_tol = number(j, path, "martingale_tol", 1e-6);
  return c;
}

RunConfig parse_root(const json& root) {
  check_keys(root, "", {"model", "basis", "simulation", "pdie", "terminal", "bsde", "pricing",
                        "verify", "output", "threads"});
  RunConfig cfg;
  if (!find(root, "model")) throw ConfigError("/model", "required");
  cfg.model_json = root["model"];
  cfg.model = build_model(cfg.model_json);
  const std::size_t n = cfg.model->dimension();

  if (const json* b = find(root, "basis")) {
    check_keys(*b, "/basis", {"D", "tol"});
    cfg.basis.D = static_cast<int>(integer(*b, "/basis", "D", 2, 1, 8));
    cfg.basis.tol = number(*b, "/basis", "tol", 1e-12);
  }
  if (const json* s = find(root, "simulation")) {
    const std::string p = "/simulation";
    check_keys(*s, p, {"T", "eps", "npaths", "seed", "steps"});
    cfg.simulation.T = number(*s, p, "T", 1.0);
    if (!(cfg.simulation.T > 0)) throw ConfigError(p + "/T", "must be positive");
    cfg.simulation.eps = number(*s, p, "eps", 1e-3);
    if (!(cfg.simulation.eps > 0)) throw ConfigError(p + "/eps", "must be positive");
    cfg.simulation.npaths = static_cast<std::size_t>(integer(*s, p, "npaths", 1000, 1, 1000000000));
    if (const json* v = find(*s, "seed")) {
      if (!v->is_number_unsigned()) throw ConfigError(p + "/seed", "expected a nonnegative integer");
      cfg.simulation.seed = v->get<std::uint64_t>();
    }
    cfg.simulation.steps = static_cast<int>(integer(*s, p, "steps", 16, 1, 1000000));
  }
  if (const json* p = find(root, "pdie")) cfg.pdie = parse_pdie(*p, n);
  if (const json* t = find(root, "terminal")) {
    cfg.terminal_json = *t;
    build_terminal(*t, n);
  }
  if (const json* b = find(root, "bsde")) cfg.bsde = parse_bsde(*b);
  if (const json* p = find(root, "pricing")) cfg.pricing = parse_pricing(*p, n);
  if (const json* v = find(root, "verify")) cfg.verify = parse_verify(*v);
  if (const json* o = find(root, "output")) {
    check_keys(*o, "/output", {"directory", "formats"});
    cfg.output.directory = string(*o, "/output", "directory", "out");
    if (const json* f = find(*o, "formats")) {
      if (!f->is_array() || f->empty()) throw ConfigError("/output/formats", "expected a nonempty array");
      cfg.output.formats.clear();
      for (std::size_t i = 0; i < f->size(); ++i) {
        const std::string p = "/output/formats/" + std::to_string(i);
        if (!(*f)[i].is_string()) throw ConfigError(p, "expected a string");
        const auto v = (*f)[i].get<std::string>();
        if (v != "csv" && v != "json") throw ConfigError(p, "expected csv or json");
        cfg.output.formats.push_back(v);
      }
    }
  }
  cfg.threads = static_cast<int>(integer(root, "", "threads", 0, 0, 4096));
  return cfg;
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte ? byte - 1 : 0), '\n');
    throw ConfigError("line " + std::to_string(line), std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_root(root);
  } catch (const ConfigError& e) {
    const int line = line_of_pointer(text, e.pointer());
    if (line > 0) throw ConfigError("line " + std::to_string(line) + " " + e.pointer(), e.detail());
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/model", e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError("/model", e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

LevyModel build_model(const json& spec) {
  const std::string path = "/model";
  check_keys(spec, path, {"dimension", "drift", "sigma", "marginals", "copula", "atoms", "poisson_jumps"});
  if (!find(spec, "dimension")) throw ConfigError(path + "/dimension", "required");
  const auto n = static_cast<std::size_t>(integer(spec, path, "dimension", 1, 1, 3));

  std::optional<Vector> drift;
  if (const json* d = find(spec, "drift")) drift = to_vector(numbers_of_size(*d, path + "/drift", n));

  Matrix sigma;
  if (const json* s = find(spec, "sigma")) {
    if (!s->is_array() || s->size() != n) throw ConfigError(path + "/sigma", "expected an n x n array");
    sigma = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      auto row = numbers_of_size((*s)[i], path + "/sigma/" + std::to_string(i), n);
      for (std::size_t j = 0; j < n; ++j) sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }

  std::optional<ClaytonCopulaParams> copula;
  if (const json* c = find(spec, "copula")) copula = copula_params(*c, path + "/copula");

  std::vector<MarginalMeasure> marginals;
  bool all_poisson = true;
  if (const json* m = find(spec, "marginals")) {
    if (!m->is_array() || m->size() != n)
      throw ConfigError(path + "/marginals", "expected one entry per dimension");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = path + "/marginals/" + std::to_string(i);
      const json& e = (*m)[i];
      check_keys(e, p, {"kind", "params"});
      const auto kind = string(e, p, "kind", "");
      const json params = e.contains("params") ? e["params"] : json::object();
      if (kind == "meixner") {
        marginals.push_back(MarginalMeasure::meixner(meixner_params(params, p + "/params")));
        all_poisson = false;
      } else if (kind == "poisson") {
        check_keys(params, p + "/params", {"intensity"});
        const double lam = number(params, p + "/params", "intensity", 1.0);
        if (!(lam > 0)) throw ConfigError(p + "/params/intensity", "must be positive");
        marginals.push_back(MarginalMeasure::poisson(lam));
      } else {
        throw ConfigError(p + "/kind", "expected meixner or poisson");
      }
    }
  }

  std::vector<Atom> atoms;
  if (const json* a = find(spec, "atoms")) {
    if (!a->is_array()) throw ConfigError(path + "/atoms", "expected an array");
    for (std::size_t j = 0; j < a->size(); ++j) {
      const std::string p = path + "/atoms/" + std::to_string(j);
      check_keys((*a)[j], p, {"x", "intensity"});
      if (!(*a)[j].contains("x")) throw ConfigError(p + "/x", "required");
      Atom atom{to_vector(numbers_of_size((*a)[j]["x"], p + "/x", n)),
                required_number((*a)[j], p, "intensity")};
      atoms.push_back(std::move(atom));
    }
  }

  const std::string pj = string(spec, path, "poisson_jumps", "with_margins");
  if (pj != "with_margins" && pj != "common")
    throw ConfigError(path + "/poisson_jumps", "expected with_margins or common");

  std::optional<LevyModel> model;
  if (!marginals.empty() && all_poisson && n == 2) {
    if (!copula) throw ConfigError(path + "/copula", "two Poisson marginals need a copula");
    const double l1 = std::get<PoissonUnitJump>(marginals[0].kind).intensity;
    const double l2 = std::get<PoissonUnitJump>(marginals[1].kind).intensity;
    model = pj == "common" ? common_poisson_measure(l1, l2, *copula)
                           : poisson_copula_with_margins(l1, l2, *copula);
    if (drift) model = model->with_drift(*drift);
    if (sigma.size()) model = model->with_sigma(sigma);
  } else if (!marginals.empty()) {
    model = LevyModel::from_marginals(drift.value_or(Vector::Zero(static_cast<Eigen::Index>(n))),
                                      marginals, copula, sigma);
  } else if (!atoms.empty()) {
    return LevyModel::atomic(drift.value_or(Vector::Zero(static_cast<Eigen::Index>(n))), atoms, sigma);
  } else {
    return LevyModel::pure_drift(drift.value_or(Vector::Zero(static_cast<Eigen::Index>(n))), sigma);
  }
  if (!atoms.empty()) model = model->with_atoms(atoms);
  return *model;
}

TerminalFunction build_terminal(const json& spec, std::size_t n) {
  const std::string path = "/terminal";
  require_object(spec, path);
  const auto kind = string(spec, path, "kind", "");
  if (kind == "constant") {
    check_keys(spec, path, {"kind", "value"});
    const double c = number(spec, path, "value", 0.0);
    return [c](std::span<const double>) { return c; };
  }
  if (kind == "linear") {
    check_keys(spec, path, {"kind", "weights", "offset"});
    if (!spec.contains("weights")) throw ConfigError(path + "/weights", "required");
    auto w = numbers_of_size(spec["weights"], path + "/weights", n);
    const double b = number(spec, path, "offset", 0.0);
    return [w, b](std::span<const double> x) {
      double s = b;
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
      return s;
    };
  }
  if (kind == "gauss_tanh") {
    check_keys(spec, path, {"kind"});
    return [](std::span<const double> x) { return std::exp(-x[0] * x[0]) + 0.5 * std::tanh(x[0]); };
  }
  if (kind == "tanh_cos") {
    check_keys(spec, path, {"kind"});
    if (n != 2) throw ConfigError(path + "/kind", "tanh_cos needs dimension 2");
    return [](std::span<const double> x) {
      return std::tanh(0.5 * (x[0] + x[1])) + 0.5 * std::cos(0.5 * x[0] - 0.3 * x[1]);
    };
  }
  throw ConfigError(path + "/kind", "expected constant, linear, gauss_tanh or tanh_cos");
}

DriverFunction build_driver(const json& spec) {
  const std::string path = "/bsde/driver";
  check_keys(spec, path, {"id", "params"});
  const auto id = string(spec, path, "id", "");
  const json params = spec.contains("params") ? spec["params"] : json::object();
  const std::string pp = path + "/params";
  if (id == "zero") {
    check_keys(params, pp, {});
    return zero_driver();
  }
  if (id == "linear") {
    check_keys(params, pp, {"rate"});
    return linear_driver(number(params, pp, "rate", 0.0));
  }
  if (id == "sine") {
    check_keys(params, pp, {"c"});
    return sine_driver(number(params, pp, "c", 0.0));
  }
  if (id == "mixed") {
    check_keys(params, pp, {"a", "b"});
    return mixed_driver(number(params, pp, "a", 0.0), number(params, pp, "b", 0.0));
  }
  throw ConfigError(path + "/id", "expected zero, linear, sine or mixed");
}

Payoff build_payoff(const json& spec, std::size_t n) {
  const std::string path = "/pricing/payoff";
  require_object(spec, path);
  const auto kind = string(spec, path, "kind", "");
  if (kind == "call" || kind == "put") {
    check_keys(spec, path, {"kind", "asset", "strike"});
    const auto asset = static_cast<std::size_t>(integer(spec, path, "asset", 0, 0, static_cast<long long>(n) - 1));
    const double K = required_number(spec, path, "strike");
    if (!(K > 0)) throw ConfigError(path + "/strike", "must be positive");
    return kind == "call" ? Payoff::call(asset, K) : Payoff::put(asset, K);
  }
  if (kind == "basket_call") {
    check_keys(spec, path, {"kind", "weights", "strike"});
    if (!spec.contains("weights")) throw ConfigError(path + "/weights", "required");
    return Payoff::basket_call(to_vector(numbers_of_size(spec["weights"], path + "/weights", n)),
                               required_number(spec, path, "strike"));
  }
  if (kind == "constant") {
    check_keys(spec, path, {"kind", "value"});
    const double c = required_number(spec, path, "value");
    return Payoff::make_custom([c](std::span<const double>) { return c; }, 0.0);
  }
  throw ConfigError(path + "/kind", "expected call, put, basket_call or constant");
}

std::uint64_t model_hash(const json& model_json) {
  const std::string s = model_json.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

PdieGrid make_pdie_grid(const PdieConfig& cfg, double T, std::size_t n, int steps) {
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n; ++i) axes.push_back(Axis{cfg.lower[i], cfg.upper[i], cfg.nodes[i]});
  return PdieGrid{SpaceGrid(std::move(axes)), TimeGrid(T, std::max(steps, 1))};
}

}  // namespace levybsde::cli
