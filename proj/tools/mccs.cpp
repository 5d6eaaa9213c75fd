// Command-line front end: simulate (learning curves at a fixed point),
// sweep (Monte Carlo sweeps), advise-stepsize (stability bounds) and
// image (block-based image CS).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mccs/config.hpp"
#include "mccs/harness.hpp"
#include "mccs/image.hpp"
#include "mccs/io.hpp"
#include "mccs/stability.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitDivergenceDominated = 4;

using nlohmann::json;

std::string resolve_out_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("MCCS_OUT_DIR")) return env;
  return ".";
}

std::string axis_name(mccs::SweepAxis axis) {
  switch (axis) {
    case mccs::SweepAxis::K: return "K";
    case mccs::SweepAxis::M: return "M";
    case mccs::SweepAxis::Alpha: return "alpha";
    case mccs::SweepAxis::OutlierProb: return "c";
    case mccs::SweepAxis::SigmaASq: return "sigma_a_sq";
    case mccs::SweepAxis::SigmaBSq: return "sigma_b_sq";
    case mccs::SweepAxis::Mu: return "mu";
    case mccs::SweepAxis::Lambda: return "lambda";
    default: return "none";
  }
}

json trial_to_json(const mccs::TrialReport& r) {
  json t;
  t["seed"] = r.seed;
  t["diverged"] = r.diverged;
  t["success"] = r.success;
  t["updates_used"] = r.updates_used;
  if (!r.diverged) t["final_sq_dev"] = r.final_sq_dev;
  return t;
}

// Wall-clock timings are reported on stderr only, so output files stay
// byte-identical across reruns with the same config and seed.
void log_timing(const std::string& what, double seconds) {
  std::cerr << what << " took " << seconds << " s\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  std::int64_t trace_stride = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Path to the JSON config file")->required();
  cmd->add_option("--out", flags.out_dir, "Output directory (overrides config and MCCS_OUT_DIR)");
  cmd->add_option("--seed", flags.seed, "Master seed (overrides the config)")
      ->each([&](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--threads", flags.threads, "Worker thread cap");
  cmd->add_option("--trace-stride", flags.trace_stride, "Trace recording stride override");
}

void apply_overrides(mccs::ExperimentSpec& spec, const CommonFlags& flags) {
  if (flags.seed_set) spec.master_seed = flags.seed;
  if (flags.threads > 0) spec.threads = flags.threads;
  if (flags.trace_stride > 0)
    for (auto& s : spec.solvers) s.cfg.trace_stride = flags.trace_stride;
}

bool divergence_dominated(const std::vector<std::vector<mccs::TrialReport>>& per_solver) {
  std::size_t total = 0, diverged = 0;
  for (const auto& solver : per_solver)
    for (const auto& r : solver) {
      ++total;
      if (r.diverged) ++diverged;
    }
  return total > 0 && 2 * diverged > total;
}

int cmd_simulate(const CommonFlags& flags) {
  auto cfg = mccs::config::parse_experiment(mccs::config::load_json(flags.config_path), false);
  apply_overrides(cfg.spec, flags);
  if (cfg.spec.axis != mccs::SweepAxis::None)
    cfg.spec.axis = mccs::SweepAxis::None;  // simulate runs the fixed point only
  const std::string out = resolve_out_dir(flags.out_dir, cfg.output_dir);
  std::filesystem::create_directories(out);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::vector<mccs::TrialReport>> reports;
  const auto curves = mccs::learning_curve(cfg.spec, &reports);
  log_timing("simulate", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  const std::string tag = "_seed" + std::to_string(cfg.spec.master_seed);
  {
    std::ofstream f(out + "/learning_curve" + tag + ".csv");
    if (!f) throw std::runtime_error("cannot write learning curve CSV");
    f << "solver,iteration,msd\n";
    for (const auto& c : curves)
      for (std::size_t i = 0; i < c.iterations.size(); ++i)
        f << c.solver << ',' << c.iterations[i] << ','
          << mccs::io::format_double(c.msd[i]) << '\n';
  }
  json report;
  report["seed"] = cfg.spec.master_seed;
  report["trials"] = cfg.spec.trials;
  report["solvers"] = json::array();
  for (std::size_t s = 0; s < cfg.spec.solvers.size(); ++s) {
    json solver;
    solver["name"] = cfg.spec.solvers[s].name;
    solver["trials"] = json::array();
    int successes = 0;
    for (const auto& r : reports[s]) {
      solver["trials"].push_back(trial_to_json(r));
      if (r.success) ++successes;
    }
    solver["successes"] = successes;
    report["solvers"].push_back(std::move(solver));
  }
  std::ofstream jf(out + "/trials" + tag + ".json");
  jf << report.dump(2) << '\n';

  return divergence_dominated(reports) ? kExitDivergenceDominated : kExitOk;
}

int cmd_sweep(const CommonFlags& flags) {
  auto cfg = mccs::config::parse_experiment(mccs::config::load_json(flags.config_path), true);
  apply_overrides(cfg.spec, flags);
  const std::string out = resolve_out_dir(flags.out_dir, cfg.output_dir);
  std::filesystem::create_directories(out);

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = mccs::run_sweep(cfg.spec);
  log_timing("sweep", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  const std::string tag = "_seed" + std::to_string(cfg.spec.master_seed);
  const std::string axis = axis_name(cfg.spec.axis);
  {
    std::ofstream f(out + "/sweep" + tag + ".csv");
    if (!f) throw std::runtime_error("cannot write sweep CSV");
    f << "axis,value,solver,probability,msd_success,msd_all,trials,successes,divergences\n";
    for (const auto& row : result.rows)
      f << axis << ',' << mccs::io::format_double(row.axis_value) << ',' << row.solver << ','
        << mccs::io::format_double(row.probability) << ','
        << mccs::io::format_double(row.msd_success) << ','
        << mccs::io::format_double(row.msd_all) << ',' << row.trials << ','
        << row.successes << ',' << row.divergences << '\n';
  }
  json report;
  report["seed"] = cfg.spec.master_seed;
  report["axis"] = axis;
  report["points"] = json::array();
  for (std::size_t a = 0; a < cfg.spec.axis_values.size(); ++a) {
    json point;
    point["value"] = cfg.spec.axis_values[a];
    point["solvers"] = json::array();
    for (std::size_t s = 0; s < cfg.spec.solvers.size(); ++s) {
      const auto& row = result.rows[a * cfg.spec.solvers.size() + s];
      json solver;
      solver["name"] = row.solver;
      solver["probability"] = row.probability;
      solver["successes"] = row.successes;
      solver["divergences"] = row.divergences;
      if (row.successes > 0) solver["msd_success"] = row.msd_success;
      if (row.trials > row.divergences) solver["msd_all"] = row.msd_all;
      solver["trials"] = json::array();
      for (const auto& r : result.reports[a][s]) solver["trials"].push_back(trial_to_json(r));
      point["solvers"].push_back(std::move(solver));
    }
    report["points"].push_back(std::move(point));
  }
  std::ofstream jf(out + "/sweep" + tag + ".json");
  jf << report.dump(2) << '\n';

  std::size_t total = 0, diverged = 0;
  for (const auto& axis_reports : result.reports)
    for (const auto& solver_reports : axis_reports)
      for (const auto& r : solver_reports) {
        ++total;
        if (r.diverged) ++diverged;
      }
  return (total > 0 && 2 * diverged > total) ? kExitDivergenceDominated : kExitOk;
}

struct AdviseFlags {
  int n = 0;
  double sigma_a_sq = 0.0;
  std::string regime = "all";
  double sigma = 0.0;
  double v_max = -1.0;
  bool as_json = false;
};

int cmd_advise(const AdviseFlags& f) {
  const bool want_rademacher = f.regime == "all" || f.regime == "rademacher";
  const bool want_bounded = f.regime == "all" || f.regime == "bounded";
  const bool want_gaussian = f.regime == "all" || f.regime == "gaussian";
  if (want_bounded && f.regime == "bounded" && (f.v_max < 0.0 || !(f.sigma > 0.0))) {
    std::cerr << "advise-stepsize: the bounded regime requires --v-max and --sigma\n";
    return kExitValidation;
  }

  struct Row {
    std::string regime;
    double bound;
  };
  std::vector<Row> rows;
  if (want_rademacher) rows.push_back({"rademacher", mccs::bound_rademacher(f.n, f.sigma_a_sq)});
  if (want_bounded && f.v_max >= 0.0 && f.sigma > 0.0)
    rows.push_back({"bounded", mccs::bound_gaussian_sensing_bounded_noise(f.n, f.sigma_a_sq,
                                                                          f.sigma, f.v_max)});
  if (want_gaussian)
    rows.push_back({"gaussian", mccs::bound_gaussian_sensing_gaussian_noise(f.n, f.sigma_a_sq)});

  if (f.as_json) {
    json out = json::array();
    for (const auto& r : rows) {
      json row;
      row["regime"] = r.regime;
      row["bound"] = r.bound;
      row["suggested_mu"] = 0.5 * r.bound;  // conservative; the true stable range may be wider
      out.push_back(std::move(row));
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "regime      bound        suggested mu (0.5x bound)\n";
    for (const auto& r : rows) {
      char line[128];
      std::snprintf(line, sizeof(line), "%-11s %-12.6f %.6f\n", r.regime.c_str(), r.bound,
                    0.5 * r.bound);
      std::cout << line;
    }
  }
  return kExitOk;
}

int cmd_image(const CommonFlags& flags, const std::string& image_path) {
  auto cfg = mccs::config::parse_image(mccs::config::load_json(flags.config_path));
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.threads > 0) cfg.cs.threads = flags.threads;
  if (flags.trace_stride > 0) cfg.cs.solver.trace_stride = flags.trace_stride;
  const std::string out = resolve_out_dir(flags.out_dir, cfg.output_dir);
  std::filesystem::create_directories(out);

  Eigen::MatrixXd image;
  if (image_path.size() >= 4 && image_path.substr(image_path.size() - 4) == ".csv")
    image = mccs::io::read_matrix_csv(image_path);
  else
    image = mccs::io::read_pgm(image_path);

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = mccs::reconstruct_image(image, cfg.cs, cfg.seed);
  log_timing("image reconstruction",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  for (const auto& b : result.blocks)
    std::cerr << "block " << b.index << ": " << b.updates_used << " updates, "
              << b.wall_time_s << " s" << (b.diverged ? " (diverged)" : "") << '\n';

  const std::string tag = "_seed" + std::to_string(cfg.seed);
  mccs::io::write_pgm(out + "/recon" + tag + ".pgm", result.reconstructed);

  json report;
  report["seed"] = cfg.seed;
  if (std::isinf(result.psnr_db))
    report["psnr_db"] = "inf";
  else
    report["psnr_db"] = result.psnr_db;
  report["blocks"] = json::array();
  int diverged = 0;
  for (const auto& b : result.blocks) {
    json blk;
    blk["index"] = b.index;
    blk["updates_used"] = b.updates_used;
    blk["diverged"] = b.diverged;
    if (b.diverged) ++diverged;
    report["blocks"].push_back(std::move(blk));
  }
  std::ofstream jf(out + "/report" + tag + ".json");
  jf << report.dump(2) << '\n';

  return 2 * diverged > static_cast<int>(result.blocks.size()) ? kExitDivergenceDominated
                                                               : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust compressive-sensing reconstruction with l0-MCC and MB-l0-MCC"};
  app.require_subcommand(1);

  CommonFlags sim_flags, sweep_flags, img_flags;
  AdviseFlags advise_flags;
  std::string image_path;

  auto* simulate = app.add_subcommand("simulate", "Learning curves and trial reports at a fixed point");
  add_common(simulate, sim_flags);

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over K, M or noise parameters");
  add_common(sweep, sweep_flags);

  auto* advise = app.add_subcommand("advise-stepsize", "Print sufficient step-size bounds");
  advise->add_option("--n", advise_flags.n, "Signal length N")->required();
  advise->add_option("--sigma-a-sq", advise_flags.sigma_a_sq, "Sensing entry variance")->required();
  advise->add_option("--regime", advise_flags.regime, "rademacher, bounded, gaussian or all")
      ->check(CLI::IsMember({"rademacher", "bounded", "gaussian", "all"}));
  advise->add_option("--sigma", advise_flags.sigma, "Kernel width (bounded regime)");
  advise->add_option("--v-max", advise_flags.v_max, "Noise bound (bounded regime)");
  advise->add_flag("--json", advise_flags.as_json, "Emit JSON instead of a table");

  auto* image = app.add_subcommand("image", "Block-based image CS reconstruction");
  image->add_option("--image", image_path, "Input image (PGM or matrix CSV)")->required();
  add_common(image, img_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (advise->parsed()) return cmd_advise(advise_flags);
    if (image->parsed()) return cmd_image(img_flags, image_path);
  } catch (const mccs::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
