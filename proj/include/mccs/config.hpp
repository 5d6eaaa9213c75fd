#pragma once

#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mccs/harness.hpp"
#include "mccs/image.hpp"

// Declarative experiment configs. Versioned schema, unknown keys rejected,
// defaults mirror the simulation parameters the solvers were tuned with
// (mu=0.2, beta=10, theta=20, epsilon=1e-4, sigma_min=0.03).

namespace mccs::config {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key: " + path + "." + key);
}

inline const json& require(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key: " + path + "." + key);
  return *it;
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for: " + path + "." + key);
  }
}

template <typename T>
T get_required(const json& j, const std::string& path, const char* key) {
  const json& v = require(j, path, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for: " + path + "." + key);
  }
}

}  // namespace detail

inline NoiseModel parse_noise(const json& j, const std::string& path) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError(path + " must be an object");
  const auto kind = get_required<std::string>(j, path, "kind");
  if (kind == "gaussian") {
    reject_unknown(j, path, {"kind", "variance"});
    return GaussianNoise{get_required<double>(j, path, "variance")};
  }
  if (kind == "gmm") {
    reject_unknown(j, path, {"kind", "c", "sigma_a_sq", "divisor", "sigma_b_sq"});
    GmmNoise m;
    m.c = get_required<double>(j, path, "c");
    m.sigma_a_sq = get_required<double>(j, path, "sigma_a_sq");
    m.sigma_b_sq = get_required<double>(j, path, "sigma_b_sq");
    m.divisor = get_or<double>(j, path, "divisor", 0.0);  // 0 tracks problem M
    return m;
  }
  if (kind == "alpha_stable") {
    reject_unknown(j, path, {"kind", "alpha", "gamma"});
    return AlphaStableNoise{get_required<double>(j, path, "alpha"),
                            get_required<double>(j, path, "gamma")};
  }
  throw ConfigError(path + ".kind must be gaussian, gmm or alpha_stable");
}

inline SolverConfig parse_solver(const json& j, const std::string& path, int problem_m) {
  using namespace detail;
  reject_unknown(j, path,
                 {"variant", "mu", "lambda", "beta", "theta", "sigma_min", "sigma_max",
                  "max_updates", "epsilon", "batch_size", "without_replacement",
                  "converge_window", "cross_threshold", "trace_stride"});
  SolverConfig cfg;
  const auto variant = get_required<std::string>(j, path, "variant");
  if (variant == "l0-mcc") cfg.variant = Variant::L0MCC;
  else if (variant == "mb-l0-mcc") cfg.variant = Variant::MBL0MCC;
  else if (variant == "l0-lms") cfg.variant = Variant::L0LMS;
  else throw ConfigError(path + ".variant must be l0-mcc, mb-l0-mcc or l0-lms");

  const bool mb = cfg.variant == Variant::MBL0MCC;
  cfg.mu = get_or<double>(j, path, "mu", 0.2);
  cfg.lambda = get_or<double>(j, path, "lambda", mb ? 1e-4 : 5e-6);
  cfg.beta = get_or<double>(j, path, "beta", 10.0);
  cfg.schedule.theta = get_or<double>(j, path, "theta", 20.0);
  cfg.schedule.sigma_min = get_or<double>(j, path, "sigma_min", 0.03);
  cfg.schedule.sigma_max = get_or<double>(j, path, "sigma_max", 0.0);
  cfg.max_updates = get_or<std::int64_t>(j, path, "max_updates", mb ? 100000 : 10000);
  cfg.epsilon = get_or<double>(j, path, "epsilon", 1e-4);
  cfg.batch_size = get_or<int>(j, path, "batch_size", 0);
  cfg.batch_without_replacement = get_or<bool>(j, path, "without_replacement", false);
  cfg.converge_window = get_or<std::int64_t>(j, path, "converge_window", 0);
  cfg.cross_threshold = get_or<double>(j, path, "cross_threshold", 1e-2);
  cfg.trace_stride = get_or<std::int64_t>(j, path, "trace_stride", 0);

  if (!(cfg.mu > 0.0)) throw ConfigError(path + ".mu must be positive");
  if (cfg.lambda < 0.0) throw ConfigError(path + ".lambda must be >= 0");
  if (!(cfg.beta > 0.0)) throw ConfigError(path + ".beta must be positive");
  if (cfg.epsilon < 0.0) throw ConfigError(path + ".epsilon must be >= 0");
  if (cfg.max_updates < 1) throw ConfigError(path + ".max_updates must be >= 1");
  if (mb && cfg.batch_size > problem_m)
    throw ConfigError(path + ".batch_size exceeds problem.M");
  return cfg;
}

inline ProblemSpec parse_problem(const json& j, const std::string& path) {
  using namespace detail;
  reject_unknown(j, path, {"N", "M", "K", "signal", "normalize", "matrix", "entry_variance"});
  ProblemSpec p;
  p.n = get_required<int>(j, path, "N");
  p.m = get_required<int>(j, path, "M");
  p.k = get_required<int>(j, path, "K");
  const auto signal = get_or<std::string>(j, path, "signal", "uniform_sym");
  if (signal == "uniform_sym") p.dist = NonzeroDist::UniformSym;
  else if (signal == "uniform_annulus") p.dist = NonzeroDist::UniformAnnulus;
  else throw ConfigError(path + ".signal must be uniform_sym or uniform_annulus");
  p.normalize = get_or<bool>(j, path, "normalize", true);
  const auto matrix = get_or<std::string>(j, path, "matrix", "gaussian");
  if (matrix == "gaussian") p.matrix = MatrixKind::GaussianIID;
  else if (matrix == "rademacher") p.matrix = MatrixKind::Rademacher;
  else throw ConfigError(path + ".matrix must be gaussian or rademacher");
  p.entry_variance = get_or<double>(j, path, "entry_variance", 0.0);
  if (p.n < 1 || p.m < 1) throw ConfigError(path + ": dimensions must be positive");
  if (p.k < 1 || p.k > p.n) throw ConfigError(path + ".K must be in [1, N]");
  return p;
}

inline SweepAxis parse_axis(const std::string& name, const std::string& path) {
  if (name == "K") return SweepAxis::K;
  if (name == "M") return SweepAxis::M;
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "c") return SweepAxis::OutlierProb;
  if (name == "sigma_a_sq") return SweepAxis::SigmaASq;
  if (name == "sigma_b_sq") return SweepAxis::SigmaBSq;
  if (name == "mu") return SweepAxis::Mu;
  if (name == "lambda") return SweepAxis::Lambda;
  throw ConfigError(path + ".axis must be one of K, M, alpha, c, sigma_a_sq, sigma_b_sq, mu, lambda");
}

struct ExperimentConfig {
  ExperimentSpec spec;
  std::string output_dir;  // empty = use CLI/env default
};

inline ExperimentConfig parse_experiment(const json& j, bool sweep_required) {
  using namespace detail;
  const std::string path = "config";
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, path,
                 {"version", "problem", "noise", "solvers", "trials", "success_threshold",
                  "seed", "threads", "sweep", "output_dir"});
  const int version = get_required<int>(j, path, "version");
  if (version != 1) throw ConfigError("config.version must be 1");

  ExperimentConfig out;
  out.spec.problem = parse_problem(require(j, path, "problem"), path + ".problem");
  out.spec.noise = parse_noise(require(j, path, "noise"), path + ".noise");

  const json& solvers = require(j, path, "solvers");
  if (!solvers.is_array() || solvers.empty())
    throw ConfigError("config.solvers must be a non-empty array");
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    const std::string spath = path + ".solvers[" + std::to_string(i) + "]";
    auto cfg = parse_solver(solvers[i], spath, out.spec.problem.m);
    std::string name = solvers[i].value("variant", "");
    out.spec.solvers.push_back({std::move(name), cfg});
  }

  out.spec.trials = get_or<int>(j, path, "trials", 50);
  if (out.spec.trials < 1) throw ConfigError("config.trials must be >= 1");
  out.spec.success_threshold = get_or<double>(j, path, "success_threshold", 5e-2);
  if (!(out.spec.success_threshold > 0.0))
    throw ConfigError("config.success_threshold must be positive");
  out.spec.master_seed = get_or<std::uint64_t>(j, path, "seed", 1);
  out.spec.threads = get_or<unsigned>(j, path, "threads", 0);
  out.output_dir = get_or<std::string>(j, path, "output_dir", "");

  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    reject_unknown(sw, path + ".sweep", {"axis", "values"});
    out.spec.axis = parse_axis(get_required<std::string>(sw, path + ".sweep", "axis"),
                               path + ".sweep");
    out.spec.axis_values = get_required<std::vector<double>>(sw, path + ".sweep", "values");
    if (out.spec.axis_values.empty()) throw ConfigError("config.sweep.values must be non-empty");
  } else if (sweep_required) {
    throw ConfigError("missing key: config.sweep (required by the sweep command)");
  }
  return out;
}

struct ImageConfig {
  ImageCsConfig cs;
  std::uint64_t seed = 1;
  std::string output_dir;
};

inline ImageConfig parse_image(const json& j) {
  using namespace detail;
  const std::string path = "config";
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, path, {"version", "patch_size", "s", "m", "sensing", "noise", "solver",
                           "seed", "threads", "output_dir"});
  const int version = get_required<int>(j, path, "version");
  if (version != 1) throw ConfigError("config.version must be 1");

  ImageConfig out;
  out.cs.patch_size = get_or<int>(j, path, "patch_size", 32);
  if (out.cs.patch_size < 1) throw ConfigError("config.patch_size must be positive");
  const int n = out.cs.patch_size * out.cs.patch_size;
  out.cs.s = get_or<int>(j, path, "s", 0);
  if (out.cs.s < 0 || out.cs.s > n) throw ConfigError("config.s must be in [1, patch_size^2]");
  out.cs.m_img = get_or<int>(j, path, "m", 500);
  const auto sensing = get_or<std::string>(j, path, "sensing", "gaussian");
  if (sensing == "gaussian") out.cs.sensing = ImageSensing::Gaussian;
  else if (sensing == "identity") {
    out.cs.sensing = ImageSensing::Identity;
    if (!j.contains("m")) out.cs.m_img = n;
  } else throw ConfigError("config.sensing must be gaussian or identity");
  if (j.contains("noise")) {
    auto noise = parse_noise(j["noise"], path + ".noise");
    if (auto* g = std::get_if<GmmNoise>(&noise))
      if (g->divisor <= 0.0) g->divisor = static_cast<double>(out.cs.m_img);
    out.cs.noise = noise;
  }
  out.cs.solver = parse_solver(require(j, path, "solver"), path + ".solver", out.cs.m_img);
  out.seed = get_or<std::uint64_t>(j, path, "seed", 1);
  out.cs.threads = get_or<unsigned>(j, path, "threads", 0);
  out.output_dir = get_or<std::string>(j, path, "output_dir", "");
  return out;
}

inline json load_json(const std::string& config_path) {
  std::ifstream f(config_path);
  if (!f) throw std::runtime_error("cannot open config: " + config_path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

}  // namespace mccs::config
