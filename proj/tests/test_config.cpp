#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "mccs/config.hpp"

using namespace mccs;
using nlohmann::json;

namespace {

json base_experiment() {
  json j;
  j["version"] = 1;
  j["problem"] = {{"N", 100}, {"M", 40}, {"K", 5}};
  j["noise"] = {{"kind", "gaussian"}, {"variance", 1e-6}};
  j["solvers"] = json::array({json{{"variant", "l0-mcc"}}});
  return j;
}

}  // namespace

TEST_CASE("noise parsing") {
  SUBCASE("gaussian") {
    auto n = config::parse_noise(json{{"kind", "gaussian"}, {"variance", 0.01}}, "x");
    CHECK(std::get<GaussianNoise>(n).variance == 0.01);
  }

  SUBCASE("gmm with and without divisor") {
    auto n = config::parse_noise(
        json{{"kind", "gmm"}, {"c", 0.04}, {"sigma_a_sq", 0.01}, {"sigma_b_sq", 0.1}}, "x");
    const auto& g = std::get<GmmNoise>(n);
    CHECK(g.c == 0.04);
    CHECK(g.divisor == 0.0);  // resolved to M at run time
    auto n2 = config::parse_noise(json{{"kind", "gmm"}, {"c", 0.04}, {"sigma_a_sq", 0.01},
                                       {"divisor", 300.0}, {"sigma_b_sq", 0.1}}, "x");
    CHECK(std::get<GmmNoise>(n2).divisor == 300.0);
  }

  SUBCASE("alpha stable") {
    auto n = config::parse_noise(json{{"kind", "alpha_stable"}, {"alpha", 1.2}, {"gamma", 0.01}}, "x");
    CHECK(std::get<AlphaStableNoise>(n).alpha == 1.2);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(config::parse_noise(json{{"kind", "laplace"}}, "x"), config::ConfigError);
    CHECK_THROWS_AS(config::parse_noise(json{{"kind", "gaussian"}}, "x"), config::ConfigError);
    CHECK_THROWS_AS(config::parse_noise(
                        json{{"kind", "gaussian"}, {"variance", 0.01}, {"extra", 1}}, "x"),
                    config::ConfigError);
  }
}

TEST_CASE("solver parsing defaults per variant") {
  auto cfg = config::parse_solver(json{{"variant", "l0-mcc"}}, "x", 300);
  CHECK(cfg.variant == Variant::L0MCC);
  CHECK(cfg.mu == 0.2);
  CHECK(cfg.lambda == 5e-6);
  CHECK(cfg.beta == 10.0);
  CHECK(cfg.schedule.theta == 20.0);
  CHECK(cfg.schedule.sigma_min == 0.03);
  CHECK(cfg.max_updates == 10000);
  CHECK(cfg.epsilon == 1e-4);

  auto mb = config::parse_solver(json{{"variant", "mb-l0-mcc"}}, "x", 300);
  CHECK(mb.variant == Variant::MBL0MCC);
  CHECK(mb.lambda == 1e-4);
  CHECK(mb.max_updates == 100000);
  CHECK(mb.batch_size == 0);  // resolved to M/10 at run time

  auto lms = config::parse_solver(json{{"variant", "l0-lms"}}, "x", 300);
  CHECK(lms.variant == Variant::L0LMS);

  SUBCASE("overrides") {
    auto c = config::parse_solver(json{{"variant", "l0-mcc"}, {"mu", 0.5}, {"lambda", 1e-3},
                                       {"theta", 15.0}, {"max_updates", 2000},
                                       {"sigma_max", 2.5}}, "x", 300);
    CHECK(c.mu == 0.5);
    CHECK(c.lambda == 1e-3);
    CHECK(c.schedule.theta == 15.0);
    CHECK(c.max_updates == 2000);
    CHECK(c.schedule.sigma_max == 2.5);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(config::parse_solver(json{{"variant", "sgd"}}, "x", 300), config::ConfigError);
    CHECK_THROWS_AS(config::parse_solver(json{{"variant", "l0-mcc"}, {"mu", 0.0}}, "x", 300),
                    config::ConfigError);
    CHECK_THROWS_AS(config::parse_solver(json{{"variant", "mb-l0-mcc"}, {"batch_size", 301}},
                                         "x", 300),
                    config::ConfigError);
    CHECK_THROWS_AS(config::parse_solver(json{{"variant", "l0-mcc"}, {"step", 0.1}}, "x", 300),
                    config::ConfigError);
  }
}

TEST_CASE("problem parsing") {
  auto p = config::parse_problem(json{{"N", 1000}, {"M", 300}, {"K", 40}}, "x");
  CHECK(p.n == 1000);
  CHECK(p.m == 300);
  CHECK(p.k == 40);
  CHECK(p.dist == NonzeroDist::UniformSym);
  CHECK(p.normalize);
  CHECK(p.matrix == MatrixKind::GaussianIID);
  CHECK(p.entry_variance == 0.0);  // resolved to 1/M downstream

  auto q = config::parse_problem(json{{"N", 50}, {"M", 20}, {"K", 3},
                                      {"signal", "uniform_annulus"},
                                      {"matrix", "rademacher"},
                                      {"normalize", false},
                                      {"entry_variance", 1.0}}, "x");
  CHECK(q.dist == NonzeroDist::UniformAnnulus);
  CHECK(q.matrix == MatrixKind::Rademacher);
  CHECK(!q.normalize);
  CHECK(q.entry_variance == 1.0);

  CHECK_THROWS_AS(config::parse_problem(json{{"N", 10}, {"M", 5}}, "x"), config::ConfigError);
  CHECK_THROWS_AS(config::parse_problem(json{{"N", 10}, {"M", 5}, {"K", 11}}, "x"),
                  config::ConfigError);
  CHECK_THROWS_AS(config::parse_problem(json{{"N", 10}, {"M", 5}, {"K", 2},
                                             {"signal", "spikes"}}, "x"),
                  config::ConfigError);
}

TEST_CASE("experiment parsing") {
  auto j = base_experiment();
  auto cfg = config::parse_experiment(j, false);
  CHECK(cfg.spec.trials == 50);
  CHECK(cfg.spec.success_threshold == 5e-2);
  CHECK(cfg.spec.master_seed == 1);
  CHECK(cfg.spec.axis == SweepAxis::None);
  REQUIRE(cfg.spec.solvers.size() == 1);
  CHECK(cfg.spec.solvers[0].name == "l0-mcc");

  SUBCASE("sweep block") {
    j["sweep"] = {{"axis", "K"}, {"values", {10.0, 20.0, 30.0}}};
    auto c = config::parse_experiment(j, true);
    CHECK(c.spec.axis == SweepAxis::K);
    REQUIRE(c.spec.axis_values.size() == 3);
    CHECK(c.spec.axis_values[1] == 20.0);
  }

  SUBCASE("sweep required but missing") {
    CHECK_THROWS_AS(config::parse_experiment(j, true), config::ConfigError);
  }

  SUBCASE("version gate") {
    j["version"] = 2;
    CHECK_THROWS_AS(config::parse_experiment(j, false), config::ConfigError);
    j.erase("version");
    CHECK_THROWS_AS(config::parse_experiment(j, false), config::ConfigError);
  }

  SUBCASE("unknown top-level key") {
    j["typo"] = 1;
    CHECK_THROWS_AS(config::parse_experiment(j, false), config::ConfigError);
  }

  SUBCASE("empty solver list") {
    j["solvers"] = json::array();
    CHECK_THROWS_AS(config::parse_experiment(j, false), config::ConfigError);
  }

  SUBCASE("axis names") {
    for (const char* axis : {"K", "M", "alpha", "c", "sigma_a_sq", "sigma_b_sq", "mu", "lambda"}) {
      j["sweep"] = {{"axis", axis}, {"values", {1.0}}};
      CHECK_NOTHROW(config::parse_experiment(j, true));
    }
    j["sweep"] = {{"axis", "banana"}, {"values", {1.0}}};
    CHECK_THROWS_AS(config::parse_experiment(j, true), config::ConfigError);
  }
}

TEST_CASE("image config parsing") {
  json j{{"version", 1},
         {"solver", {{"variant", "l0-mcc"}}}};
  auto cfg = config::parse_image(j);
  CHECK(cfg.cs.patch_size == 32);
  CHECK(cfg.cs.s == 0);
  CHECK(cfg.cs.m_img == 500);
  CHECK(cfg.cs.sensing == ImageSensing::Gaussian);
  CHECK(!cfg.cs.noise.has_value());
  CHECK(cfg.seed == 1);

  SUBCASE("identity sensing defaults M to B^2") {
    j["sensing"] = "identity";
    j["patch_size"] = 8;
    auto c = config::parse_image(j);
    CHECK(c.cs.m_img == 64);
  }

  SUBCASE("gmm divisor tracks M") {
    j["m"] = 200;
    j["noise"] = {{"kind", "gmm"}, {"c", 0.04}, {"sigma_a_sq", 0.01}, {"sigma_b_sq", 0.1}};
    auto c = config::parse_image(j);
    REQUIRE(c.cs.noise.has_value());
    CHECK(std::get<GmmNoise>(*c.cs.noise).divisor == 200.0);
  }

  SUBCASE("errors") {
    j["s"] = 2000;
    CHECK_THROWS_AS(config::parse_image(j), config::ConfigError);
    j = json{{"version", 1}};
    CHECK_THROWS_AS(config::parse_image(j), config::ConfigError);  // solver required
  }
}
