#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mccs/noise.hpp"
#include "mccs/parallel.hpp"
#include "mccs/problem.hpp"
#include "mccs/rng.hpp"
#include "mccs/solver.hpp"

// Monte Carlo experiment runner: MSD, learning curves and reconstruction
// probability over sweeps of K, M, noise parameters, mu, lambda and alpha.

namespace mccs {

enum class SweepAxis { None, K, M, Alpha, OutlierProb, SigmaASq, SigmaBSq, Mu, Lambda };

struct ProblemSpec {
  int n = 1000;
  int m = 300;
  int k = 40;
  NonzeroDist dist = NonzeroDist::UniformSym;
  bool normalize = true;
  MatrixKind matrix = MatrixKind::GaussianIID;
  double entry_variance = 0.0;  // <= 0 picks 1/M
};

struct NamedSolver {
  std::string name;
  SolverConfig cfg;
};

struct ExperimentSpec {
  ProblemSpec problem;
  NoiseModel noise = GmmNoise{0.04, 0.01, 0.0, 0.1};  // divisor 0 tracks M
  std::vector<NamedSolver> solvers;
  int trials = 50;
  double success_threshold = 5e-2;
  std::uint64_t master_seed = 1;
  SweepAxis axis = SweepAxis::None;
  std::vector<double> axis_values;  // ignored when axis == None
  unsigned threads = 0;             // 0 picks hardware concurrency
};

struct TrialReport {
  double final_sq_dev = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
  bool diverged = false;
  std::int64_t updates_used = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  double axis_value = 0.0;
  std::string solver;
  double probability = 0.0;
  double msd_success = std::numeric_limits<double>::quiet_NaN();  // successes only
  double msd_all = std::numeric_limits<double>::quiet_NaN();      // all finished trials
  int trials = 0;
  int successes = 0;
  int divergences = 0;
};

struct SweepOutput {
  std::vector<SweepResult> rows;  // ordered by (axis point, solver)
  // reports[axis][solver][trial]
  std::vector<std::vector<std::vector<TrialReport>>> reports;
};

inline double msd(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& x) {
  if (estimates.empty()) throw std::invalid_argument("msd: empty estimate list");
  double sum = 0.0;
  for (const auto& w : estimates) {
    if (w.size() != x.size()) throw std::invalid_argument("msd: estimate length mismatch");
    sum += (w - x).squaredNorm();
  }
  return sum / static_cast<double>(estimates.size());
}

namespace detail {

// Seed stream labels; distinct per purpose so each stochastic ingredient
// of a trial is reproducible in isolation.
enum : std::uint64_t { kSignal = 1, kMatrix = 2, kNoise = 3, kSolverBase = 16 };

inline NoiseModel resolve_divisor(NoiseModel noise, int m) {
  if (auto* g = std::get_if<GmmNoise>(&noise))
    if (g->divisor <= 0.0) g->divisor = static_cast<double>(m);
  return noise;
}

struct AxisPoint {
  ProblemSpec problem;
  NoiseModel noise;
  std::vector<NamedSolver> solvers;
  double value;
};

inline AxisPoint apply_axis(const ExperimentSpec& spec, double value) {
  AxisPoint pt{spec.problem, spec.noise, spec.solvers, value};
  switch (spec.axis) {
    case SweepAxis::None:
      break;
    case SweepAxis::K:
      pt.problem.k = static_cast<int>(value);
      break;
    case SweepAxis::M:
      pt.problem.m = static_cast<int>(value);
      break;
    case SweepAxis::Alpha:
      std::get<AlphaStableNoise>(pt.noise).alpha = value;
      break;
    case SweepAxis::OutlierProb:
      std::get<GmmNoise>(pt.noise).c = value;
      break;
    case SweepAxis::SigmaASq:
      std::get<GmmNoise>(pt.noise).sigma_a_sq = value;
      break;
    case SweepAxis::SigmaBSq:
      std::get<GmmNoise>(pt.noise).sigma_b_sq = value;
      break;
    case SweepAxis::Mu:
      for (auto& s : pt.solvers) s.cfg.mu = value;
      break;
    case SweepAxis::Lambda:
      for (auto& s : pt.solvers) s.cfg.lambda = value;
      break;
  }
  return pt;
}

inline ReconstructionProblem make_trial_problem(const AxisPoint& pt,
                                                std::uint64_t master,
                                                std::size_t axis_idx, int trial) {
  const double var = pt.problem.entry_variance > 0.0
                         ? pt.problem.entry_variance
                         : 1.0 / static_cast<double>(pt.problem.m);
  auto x = generate_sparse_signal(pt.problem.n, pt.problem.k, pt.problem.dist,
                                  pt.problem.normalize,
                                  rng::derive(master, kSignal, axis_idx, trial));
  auto phi = generate_sensing_matrix(pt.problem.m, pt.problem.n, pt.problem.matrix,
                                     var, rng::derive(master, kMatrix, axis_idx, trial));
  auto noise = sample_noise(resolve_divisor(pt.noise, pt.problem.m), pt.problem.m,
                            rng::derive(master, kNoise, axis_idx, trial));
  auto y = measure(phi, x, noise);
  return {std::move(phi), std::move(y), std::move(x)};
}

}  // namespace detail

// One trial: fresh signal, sensing matrix and noise; runs a single solver.
// Divergence is recorded as failure, not propagated.
inline TrialReport run_trial(const ReconstructionProblem& problem, const SolverConfig& cfg,
                             double success_threshold, std::uint64_t seed,
                             RunTrace* trace_out = nullptr) {
  TrialReport r;
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto result = run(problem, cfg, seed);
    r.final_sq_dev = (result.w - problem.truth->values).squaredNorm();
    r.success = r.final_sq_dev < success_threshold;
    r.updates_used = result.trace.updates_used;
    if (trace_out) *trace_out = std::move(result.trace);
  } catch (const DivergenceError& e) {
    r.diverged = true;
    r.updates_used = e.iteration();
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline SweepOutput run_sweep(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("experiment spec: trials must be >= 1");
  if (!(spec.success_threshold > 0.0))
    throw std::invalid_argument("experiment spec: success threshold must be positive");
  if (spec.solvers.empty()) throw std::invalid_argument("experiment spec: no solvers given");
  std::vector<double> values = spec.axis == SweepAxis::None ? std::vector<double>{0.0}
                                                            : spec.axis_values;
  if (values.empty()) throw std::invalid_argument("experiment spec: empty sweep range");

  const std::size_t n_axis = values.size();
  const std::size_t n_solvers = spec.solvers.size();
  SweepOutput out;
  out.reports.assign(n_axis, std::vector<std::vector<TrialReport>>(
                                 n_solvers, std::vector<TrialReport>(spec.trials)));

  std::vector<detail::AxisPoint> points;
  points.reserve(n_axis);
  for (double v : values) points.push_back(detail::apply_axis(spec, v));

  const unsigned threads = spec.threads > 0 ? spec.threads : default_thread_count();
  const std::size_t jobs = n_axis * static_cast<std::size_t>(spec.trials);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t a = job / spec.trials;
    const int t = static_cast<int>(job % spec.trials);
    const auto problem = detail::make_trial_problem(points[a], spec.master_seed, a, t);
    for (std::size_t s = 0; s < n_solvers; ++s) {
      const std::uint64_t seed = rng::derive(spec.master_seed, detail::kSolverBase + s, a, t);
      out.reports[a][s][t] =
          run_trial(problem, points[a].solvers[s].cfg, spec.success_threshold, seed);
    }
  });

  for (std::size_t a = 0; a < n_axis; ++a) {
    for (std::size_t s = 0; s < n_solvers; ++s) {
      SweepResult row;
      row.axis_value = values[a];
      row.solver = spec.solvers[s].name;
      row.trials = spec.trials;
      double sum_success = 0.0, sum_all = 0.0;
      int finished = 0;
      for (const auto& r : out.reports[a][s]) {
        if (r.diverged) {
          ++row.divergences;
          continue;
        }
        ++finished;
        sum_all += r.final_sq_dev;
        if (r.success) {
          ++row.successes;
          sum_success += r.final_sq_dev;
        }
      }
      row.probability = static_cast<double>(row.successes) / spec.trials;
      if (row.successes > 0) row.msd_success = sum_success / row.successes;
      if (finished > 0) row.msd_all = sum_all / finished;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

struct LearningCurve {
  std::string solver;
  std::vector<std::int64_t> iterations;
  std::vector<double> msd;  // pointwise mean of per-trial squared deviations
};

// Averaged learning curves at a fixed experiment point. Per-trial traces
// share the stride grid; early-terminated runs are padded with their final
// deviation.
inline std::vector<LearningCurve> learning_curve(
    const ExperimentSpec& spec,
    std::vector<std::vector<TrialReport>>* reports_out = nullptr) {
  if (spec.axis != SweepAxis::None)
    throw std::invalid_argument("learning_curve: requires a fixed experiment point");
  if (spec.trials < 1) throw std::invalid_argument("learning_curve: trials must be >= 1");
  const auto pt = detail::apply_axis(spec, 0.0);
  const std::size_t n_solvers = spec.solvers.size();
  const unsigned threads = spec.threads > 0 ? spec.threads : default_thread_count();

  std::vector<std::vector<RunTrace>> traces(n_solvers, std::vector<RunTrace>(spec.trials));
  std::vector<std::vector<TrialReport>> reports(n_solvers, std::vector<TrialReport>(spec.trials));
  parallel_for(static_cast<std::size_t>(spec.trials), threads, [&](std::size_t t) {
    const auto problem = detail::make_trial_problem(pt, spec.master_seed, 0, static_cast<int>(t));
    for (std::size_t s = 0; s < n_solvers; ++s) {
      const std::uint64_t seed = rng::derive(spec.master_seed, detail::kSolverBase + s, 0, t);
      reports[s][t] = run_trial(problem, spec.solvers[s].cfg, spec.success_threshold,
                                seed, &traces[s][t]);
    }
  });

  std::vector<LearningCurve> curves;
  for (std::size_t s = 0; s < n_solvers; ++s) {
    const auto& cfg = spec.solvers[s].cfg;
    const std::int64_t stride = cfg.trace_stride > 0
                                    ? cfg.trace_stride
                                    : std::max<std::int64_t>(1, cfg.max_updates / 2000);
    LearningCurve curve;
    curve.solver = spec.solvers[s].name;
    for (std::int64_t it = 0; it <= cfg.max_updates; it += stride)
      curve.iterations.push_back(it);
    curve.msd.assign(curve.iterations.size(), 0.0);
    int used = 0;
    for (int t = 0; t < spec.trials; ++t) {
      const auto& samples = traces[s][t].msd_samples;
      if (samples.empty()) continue;  // diverged before any sample
      ++used;
      std::size_t j = 0;
      for (std::size_t g = 0; g < curve.iterations.size(); ++g) {
        while (j + 1 < samples.size() && samples[j + 1].iteration <= curve.iterations[g]) ++j;
        curve.msd[g] += samples[j].sq_dev;
      }
    }
    if (used > 0)
      for (auto& v : curve.msd) v /= used;
    curves.push_back(std::move(curve));
  }
  if (reports_out) *reports_out = std::move(reports);
  return curves;
}

}  // namespace mccs
