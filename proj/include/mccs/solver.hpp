#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mccs/kernel.hpp"
#include "mccs/problem.hpp"
#include "mccs/rng.hpp"

// l0-MCC, MB-l0-MCC and the l0-LMS limit: zero-attraction operator,
// single-step updates and the full-run driver.

namespace mccs {

enum class Variant { L0MCC, MBL0MCC, L0LMS };

struct SolverConfig {
  Variant variant = Variant::L0MCC;
  double mu = 0.2;
  double lambda = 5e-6;
  double beta = 10.0;
  KernelSchedule schedule;             // schedule.max_updates mirrors max_updates
  std::int64_t max_updates = 10000;    // C
  double epsilon = 1e-4;               // convergence tolerance on |delta w|^2
  int batch_size = 0;                  // S; 0 picks 0.1*M at run start (MB only)
  bool batch_without_replacement = false;
  std::int64_t converge_window = 0;    // 0 picks M (single-sample) or 1 (MB)
  double cross_threshold = 1e-2;       // squared deviation recorded on first crossing
  std::int64_t trace_stride = 0;       // 0 picks max(1, C/2000)
};

struct SolverState {
  Eigen::VectorXd w;           // current estimate, starts at zero
  std::int64_t i = 0;          // weight-update counter
  double sigma_now = 1.0;      // current kernel width
  double last_delta_sq = 0.0;  // |w(i+1) - w(i)|^2 of most recent update
};

struct TracePoint {
  std::int64_t iteration;
  double sq_dev;
  double sigma;
};

enum class Termination { Converged, MaxIterations };

struct RunTrace {
  std::vector<TracePoint> msd_samples;  // populated when truth is available
  Termination termination = Termination::MaxIterations;
  std::int64_t updates_used = 0;
  std::optional<std::int64_t> first_cross;  // first update with sq dev < cross_threshold
  std::int64_t converge_window = 1;         // consecutive-update rule actually applied
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t iteration, const std::string& what)
      : std::runtime_error("divergence at update " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

// Piecewise-linear l0-gradient surrogate. Zero at the origin and outside
// the attraction region [-1/beta, 1/beta].
inline double zero_attraction_scalar(double w, double beta) {
  if (w >= -1.0 / beta && w < 0.0) return beta * beta * w + beta;
  if (w > 0.0 && w <= 1.0 / beta) return beta * beta * w - beta;
  return 0.0;
}

inline Eigen::VectorXd zero_attraction(const Eigen::VectorXd& w, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("zero_attraction: beta must be positive");
  return w.unaryExpr([beta](double v) { return zero_attraction_scalar(v, beta); });
}

namespace detail {

inline void check_finite(const SolverState& state, double e) {
  if (!std::isfinite(e) || !std::isfinite(state.last_delta_sq))
    throw DivergenceError(state.i, "non-finite residual or update");
}

// Shared by l0-MCC and l0-LMS; the latter fixes the kernel factor at 1.
template <typename Row>
void single_sample_step(SolverState& state, const Row& phi_row, double y_i,
                        const SolverConfig& cfg, bool use_kernel) {
  const double e = y_i - state.w.dot(phi_row);
  const double g = use_kernel ? kernel_weight(e, state.sigma_now) : 1.0;
  Eigen::VectorXd delta = (cfg.mu * g * e) * phi_row;
  if (cfg.lambda != 0.0)
    delta += (cfg.mu * cfg.lambda) * zero_attraction(state.w, cfg.beta);
  state.last_delta_sq = delta.squaredNorm();
  state.w += delta;
  state.i += 1;
  check_finite(state, e);
}

}  // namespace detail

// Eq.-style update: w <- w + mu exp(-e^2/2sigma^2) e phi + mu lambda z_beta(w),
// with the zero attraction evaluated on the pre-update w.
template <typename Row>
void l0_mcc_step(SolverState& state, const Row& phi_row, double y_i,
                 const SolverConfig& cfg) {
  detail::single_sample_step(state, phi_row, y_i, cfg, true);
}

template <typename Row>
void l0_lms_step(SolverState& state, const Row& phi_row, double y_i,
                 const SolverConfig& cfg) {
  detail::single_sample_step(state, phi_row, y_i, cfg, false);
}

// Mini-batch update over explicit row indices (zero-based). All residuals
// are taken against the pre-update w.
inline void mb_l0_mcc_step_indices(SolverState& state, const SensingMatrix& phi,
                                   const Eigen::VectorXd& y, const SolverConfig& cfg,
                                   std::span<const int> indices) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(state.w.size());
  double worst_e = 0.0;
  for (int r : indices) {
    const auto row = phi.entries.row(r);
    const double e = y[r] - state.w.dot(row);
    const double g = kernel_weight(e, state.sigma_now);
    delta += (cfg.mu * g * e) * row;
    if (!std::isfinite(e)) worst_e = e;
  }
  if (cfg.lambda != 0.0)
    delta += (cfg.mu * cfg.lambda) * zero_attraction(state.w, cfg.beta);
  state.last_delta_sq = delta.squaredNorm();
  state.w += delta;
  state.i += 1;
  detail::check_finite(state, worst_e);
}

inline void draw_batch_indices(std::vector<int>& out, int batch, int m,
                               bool without_replacement, rng::Stream& g) {
  out.resize(batch);
  if (without_replacement) {
    // partial Fisher-Yates over [0, M)
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (int i = 0; i < batch; ++i) {
      std::uniform_int_distribution<int> pick(i, m - 1);
      std::swap(idx[i], idx[pick(g)]);
      out[i] = idx[i];
    }
  } else {
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (int i = 0; i < batch; ++i) out[i] = pick(g);
  }
}

inline void mb_l0_mcc_step(SolverState& state, const ReconstructionProblem& problem,
                           const SolverConfig& cfg, rng::Stream& g) {
  const int m = static_cast<int>(problem.phi.rows());
  const int batch = cfg.batch_size > 0 ? cfg.batch_size : std::max(1, m / 10);
  if (batch > m) throw std::invalid_argument("mb_l0_mcc_step: batch size S exceeds M");
  std::vector<int> idx;
  draw_batch_indices(idx, batch, m, cfg.batch_without_replacement, g);
  mb_l0_mcc_step_indices(state, problem.phi, problem.y, cfg, idx);
}

struct RunResult {
  Eigen::VectorXd w;
  RunTrace trace;
};

inline void validate(const SolverConfig& cfg, const ReconstructionProblem& problem) {
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("solver config: mu must be positive");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("solver config: lambda must be >= 0");
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("solver config: beta must be positive");
  if (!(cfg.epsilon >= 0.0)) throw std::invalid_argument("solver config: epsilon must be >= 0");
  if (cfg.max_updates < 1) throw std::invalid_argument("solver config: max updates must be >= 1");
  if (cfg.variant == Variant::MBL0MCC && cfg.batch_size > problem.phi.rows())
    throw std::invalid_argument("solver config: batch size S exceeds M");
}

// Full run per Algorithms 1-2: recursive row reuse (single-sample variants)
// or random mini-batches, kernel width annealed per weight update, stop on
// |delta w|^2 < epsilon held for `converge_window` consecutive updates.
inline RunResult run(const ReconstructionProblem& problem, SolverConfig cfg,
                     std::uint64_t seed) {
  validate(cfg, problem);
  const int m = static_cast<int>(problem.phi.rows());
  const int n = static_cast<int>(problem.phi.cols());

  KernelSchedule sched = cfg.schedule;
  sched.max_updates = cfg.max_updates;
  if (sched.sigma_max <= 0.0) sched.sigma_max = estimate_sigma_max(problem.y, sched.sigma_min);

  const bool mb = cfg.variant == Variant::MBL0MCC;
  const std::int64_t window = cfg.converge_window > 0 ? cfg.converge_window
                                                      : (mb ? 1 : m);
  const std::int64_t stride = cfg.trace_stride > 0 ? cfg.trace_stride
                                                   : std::max<std::int64_t>(1, cfg.max_updates / 2000);
  const double div_threshold =
      1e6 * std::max(1.0, problem.y.squaredNorm() / problem.phi.entry_variance);

  SolverState state;
  state.w = Eigen::VectorXd::Zero(n);
  auto g = rng::make_stream(rng::derive(seed, 0x6d62 /*"mb"*/));

  RunTrace trace;
  trace.converge_window = window;
  const SparseSignal* truth = problem.truth ? &*problem.truth : nullptr;

  auto sq_dev = [&]() { return (state.w - truth->values).squaredNorm(); };
  if (truth)
    trace.msd_samples.push_back({0, sq_dev(), anneal_sigma(0, sched)});

  std::int64_t consecutive = 0;
  while (state.i < cfg.max_updates) {
    state.sigma_now = anneal_sigma(state.i, sched);
    if (mb) {
      mb_l0_mcc_step(state, problem, cfg, g);
    } else {
      const int row = static_cast<int>(state.i % m);  // zero-based recursive reuse
      if (cfg.variant == Variant::L0MCC)
        l0_mcc_step(state, problem.phi.entries.row(row), problem.y[row], cfg);
      else
        l0_lms_step(state, problem.phi.entries.row(row), problem.y[row], cfg);
    }
    if (truth) {
      const double d = sq_dev();
      if (!trace.first_cross && d < cfg.cross_threshold) trace.first_cross = state.i;
      if (state.i % stride == 0 || state.i == cfg.max_updates)
        trace.msd_samples.push_back({state.i, d, state.sigma_now});
    }
    if (state.w.squaredNorm() > div_threshold)
      throw DivergenceError(state.i, "weight norm exceeded divergence threshold");
    if (state.last_delta_sq < cfg.epsilon) {
      if (++consecutive >= window) {
        trace.termination = Termination::Converged;
        break;
      }
    } else {
      consecutive = 0;
    }
  }
  trace.updates_used = state.i;
  if (truth && (trace.msd_samples.empty() || trace.msd_samples.back().iteration != state.i))
    trace.msd_samples.push_back({state.i, sq_dev(), state.sigma_now});
  return {std::move(state.w), std::move(trace)};
}

}  // namespace mccs
