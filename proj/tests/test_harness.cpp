#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mccs/harness.hpp"

using namespace mccs;

namespace {

// Small, fast experiment point used across these tests.
ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.problem.n = 60;
  spec.problem.m = 40;
  spec.problem.k = 5;
  spec.problem.dist = NonzeroDist::UniformAnnulus;
  spec.noise = GaussianNoise{1e-6};
  NamedSolver s;
  s.name = "l0-mcc";
  s.cfg.mu = 0.5;
  s.cfg.lambda = 5e-6;
  s.cfg.max_updates = 20000;
  s.cfg.epsilon = 1e-10;
  spec.solvers = {s};
  spec.trials = 8;
  spec.success_threshold = 1e-3;
  spec.master_seed = 42;
  spec.threads = 2;
  return spec;
}

}  // namespace

TEST_CASE("msd helper") {
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;
  std::vector<Eigen::VectorXd> est;
  est.push_back((Eigen::VectorXd(2) << 1.0, -1.0).finished());
  CHECK(msd(est, x) == 0.0);
  est.push_back((Eigen::VectorXd(2) << 2.0, -1.0).finished());
  CHECK(msd(est, x) == doctest::Approx(0.5).epsilon(1e-15));  // (0 + 1) / 2
  est.push_back((Eigen::VectorXd(2) << 1.0, 1.0).finished());
  CHECK(msd(est, x) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  std::vector<Eigen::VectorXd> empty;
  CHECK_THROWS_AS(msd(empty, x), std::invalid_argument);
  est.push_back(Eigen::VectorXd::Zero(3));
  CHECK_THROWS_AS(msd(est, x), std::invalid_argument);
}

TEST_CASE("trial problems are deterministic and well-formed") {
  auto spec = small_spec();
  auto pt = detail::apply_axis(spec, 0.0);
  auto p1 = detail::make_trial_problem(pt, spec.master_seed, 0, 3);
  auto p2 = detail::make_trial_problem(pt, spec.master_seed, 0, 3);
  CHECK(p1.y == p2.y);
  CHECK(p1.phi.entries == p2.phi.entries);
  CHECK(p1.truth->values == p2.truth->values);

  auto p3 = detail::make_trial_problem(pt, spec.master_seed, 0, 4);
  CHECK(p1.y != p3.y);
  CHECK(p1.phi.entries != p3.phi.entries);

  // default entry variance tracks 1/M
  const double var = p1.phi.entry_variance;
  CHECK(var == doctest::Approx(1.0 / 40.0).epsilon(1e-15));
  CHECK(p1.phi.rows() == 40);
  CHECK(p1.phi.cols() == 60);
}

TEST_CASE("gmm divisor resolution") {
  NoiseModel noise = GmmNoise{0.1, 0.02, 0.0, 0.5};
  auto resolved = detail::resolve_divisor(noise, 250);
  CHECK(std::get<GmmNoise>(resolved).divisor == 250.0);
  // explicit divisors pass through
  noise = GmmNoise{0.1, 0.02, 7.0, 0.5};
  resolved = detail::resolve_divisor(noise, 250);
  CHECK(std::get<GmmNoise>(resolved).divisor == 7.0);
}

TEST_CASE("axis application") {
  auto spec = small_spec();
  spec.noise = GmmNoise{0.04, 0.01, 0.0, 0.1};

  spec.axis = SweepAxis::K;
  CHECK(detail::apply_axis(spec, 12.0).problem.k == 12);
  spec.axis = SweepAxis::M;
  CHECK(detail::apply_axis(spec, 80.0).problem.m == 80);
  spec.axis = SweepAxis::OutlierProb;
  CHECK(std::get<GmmNoise>(detail::apply_axis(spec, 0.2).noise).c == 0.2);
  spec.axis = SweepAxis::SigmaBSq;
  CHECK(std::get<GmmNoise>(detail::apply_axis(spec, 0.7).noise).sigma_b_sq == 0.7);
  spec.axis = SweepAxis::Mu;
  CHECK(detail::apply_axis(spec, 0.05).solvers[0].cfg.mu == 0.05);
  spec.axis = SweepAxis::Lambda;
  CHECK(detail::apply_axis(spec, 1e-3).solvers[0].cfg.lambda == 1e-3);
  spec.noise = AlphaStableNoise{1.5, 0.01};
  spec.axis = SweepAxis::Alpha;
  CHECK(std::get<AlphaStableNoise>(detail::apply_axis(spec, 1.2).noise).alpha == 1.2);
}

TEST_CASE("run_trial outcomes") {
  auto spec = small_spec();
  auto pt = detail::apply_axis(spec, 0.0);
  auto problem = detail::make_trial_problem(pt, spec.master_seed, 0, 0);

  SUBCASE("successful reconstruction") {
    auto r = run_trial(problem, spec.solvers[0].cfg, spec.success_threshold, 5);
    CHECK(!r.diverged);
    CHECK(r.success);
    CHECK(r.final_sq_dev < spec.success_threshold);
    CHECK(r.updates_used > 0);
  }

  SUBCASE("divergence maps to a failed trial") {
    SolverConfig bad = spec.solvers[0].cfg;
    bad.mu = 50.0;
    bad.schedule.sigma_max = 1e9;
    bad.schedule.theta = 0.0;
    bad.epsilon = 0.0;
    auto r = run_trial(problem, bad, spec.success_threshold, 5);
    CHECK(r.diverged);
    CHECK(!r.success);
  }

  SUBCASE("trace is forwarded on request") {
    RunTrace trace;
    auto r = run_trial(problem, spec.solvers[0].cfg, spec.success_threshold, 5, &trace);
    REQUIRE(!trace.msd_samples.empty());
    CHECK(trace.msd_samples.back().sq_dev == doctest::Approx(r.final_sq_dev).epsilon(1e-12));
  }
}

TEST_CASE("sweep aggregation") {
  auto spec = small_spec();
  spec.axis = SweepAxis::K;
  spec.axis_values = {3.0, 8.0};

  auto out = run_sweep(spec);
  REQUIRE(out.rows.size() == 2);
  REQUIRE(out.reports.size() == 2);
  REQUIRE(out.reports[0].size() == 1);
  REQUIRE(out.reports[0][0].size() == static_cast<std::size_t>(spec.trials));

  for (const auto& row : out.rows) {
    CHECK(row.trials == spec.trials);
    CHECK(row.successes >= 0);
    CHECK(row.successes <= row.trials);
    CHECK(row.probability == doctest::Approx(static_cast<double>(row.successes) / row.trials));
  }
  // easy regime: nearly all trials succeed at both K values
  CHECK(out.rows[0].probability > 0.8);

  SUBCASE("aggregates match a hand recount of the trial reports") {
    const auto& reports = out.reports[0][0];
    int succ = 0, div = 0, fin = 0;
    double sum_s = 0.0, sum_a = 0.0;
    for (const auto& r : reports) {
      if (r.diverged) { ++div; continue; }
      ++fin;
      sum_a += r.final_sq_dev;
      if (r.success) { ++succ; sum_s += r.final_sq_dev; }
    }
    CHECK(out.rows[0].successes == succ);
    CHECK(out.rows[0].divergences == div);
    if (succ > 0)
      CHECK(out.rows[0].msd_success == doctest::Approx(sum_s / succ).epsilon(1e-12));
    if (fin > 0)
      CHECK(out.rows[0].msd_all == doctest::Approx(sum_a / fin).epsilon(1e-12));
  }

  SUBCASE("thread count does not change results") {
    auto one = spec;
    one.threads = 1;
    auto four = spec;
    four.threads = 4;
    auto a = run_sweep(one);
    auto b = run_sweep(four);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].probability == b.rows[i].probability);
      CHECK(a.rows[i].msd_all == b.rows[i].msd_all);
    }
  }

  SUBCASE("validation") {
    auto bad = spec;
    bad.trials = 0;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.axis_values.clear();
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.solvers.clear();
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
  }
}

TEST_CASE("learning curves") {
  auto spec = small_spec();
  spec.trials = 6;
  spec.solvers[0].cfg.trace_stride = 100;

  std::vector<std::vector<TrialReport>> reports;
  auto curves = learning_curve(spec, &reports);
  REQUIRE(curves.size() == 1);
  const auto& c = curves[0];
  REQUIRE(!c.iterations.empty());
  CHECK(c.iterations.front() == 0);
  CHECK(c.iterations.back() == spec.solvers[0].cfg.max_updates);
  for (std::size_t i = 1; i < c.iterations.size(); ++i)
    CHECK(c.iterations[i] - c.iterations[i - 1] == 100);

  // deviation starts at |x|^2 = 1 for normalized signals and decays
  CHECK(c.msd.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.msd.back() < 1e-3);
  CHECK(reports.size() == 1);
  CHECK(reports[0].size() == 6);

  SUBCASE("tail equals the mean final deviation of the trials") {
    double sum = 0.0;
    for (const auto& r : reports[0]) sum += r.final_sq_dev;
    CHECK(c.msd.back() == doctest::Approx(sum / 6.0).epsilon(1e-10));
  }

  SUBCASE("sweep axes are rejected") {
    spec.axis = SweepAxis::K;
    spec.axis_values = {3.0};
    CHECK_THROWS_AS(learning_curve(spec), std::invalid_argument);
  }
}
