#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <variant>

#include <Eigen/Dense>

#include "mccs/rng.hpp"

// Measurement-noise models: Gaussian, two-component Gaussian mixture and
// symmetric alpha-stable.

namespace mccs {

struct GaussianNoise {
  double variance = 1.0;
};

// (1-c) N(0, sigma_a_sq / divisor) + c N(0, sigma_b_sq).
// The first-component variance is kept as (sigma_a_sq, divisor) so sweeps
// over sigma_a_sq can be expressed directly.
struct GmmNoise {
  double c = 0.0;           // outlier occurrence probability
  double sigma_a_sq = 1.0;  // general-noise variance numerator
  double divisor = 1.0;     // typically the measurement count M
  double sigma_b_sq = 1.0;  // outlier variance
};

// Characteristic function exp(-gamma^alpha |t|^alpha), beta = 0.
struct AlphaStableNoise {
  double alpha = 2.0;  // in (0, 2]
  double gamma = 1.0;  // scale, > 0
};

using NoiseModel = std::variant<GaussianNoise, GmmNoise, AlphaStableNoise>;

inline void validate(const NoiseModel& model) {
  if (const auto* g = std::get_if<GaussianNoise>(&model)) {
    if (!(g->variance >= 0.0)) throw std::invalid_argument("gaussian noise: variance must be >= 0");
  } else if (const auto* m = std::get_if<GmmNoise>(&model)) {
    if (!(m->c >= 0.0 && m->c <= 1.0)) throw std::invalid_argument("gmm noise: c must be in [0,1]");
    if (!(m->sigma_a_sq > 0.0)) throw std::invalid_argument("gmm noise: sigma_a_sq must be positive");
    if (!(m->sigma_b_sq > 0.0)) throw std::invalid_argument("gmm noise: sigma_b_sq must be positive");
    if (!(m->divisor > 0.0)) throw std::invalid_argument("gmm noise: divisor must be positive");
  } else if (const auto* a = std::get_if<AlphaStableNoise>(&model)) {
    if (!(a->alpha > 0.0 && a->alpha <= 2.0)) throw std::invalid_argument("alpha-stable noise: alpha must be in (0,2]");
    if (!(a->gamma > 0.0)) throw std::invalid_argument("alpha-stable noise: gamma must be positive");
  }
}

namespace detail {

// Chambers-Mallows-Stuck transform, symmetric case.
inline double sample_sas(double alpha, double gamma, rng::Stream& g) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = std::numbers::pi * (unif(g) - 0.5);  // (-pi/2, pi/2)
  if (alpha == 1.0) return gamma * std::tan(u);
  double w = -std::log(1.0 - unif(g));  // Exp(1), strictly positive
  const double x = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
                   std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
  return gamma * x;
}

}  // namespace detail

inline Eigen::VectorXd sample_noise(const NoiseModel& model, Eigen::Index count,
                                    std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_noise: count must be >= 1");
  validate(model);
  auto g = rng::make_stream(seed);
  Eigen::VectorXd v(count);
  if (const auto* gauss = std::get_if<GaussianNoise>(&model)) {
    std::normal_distribution<double> n(0.0, std::sqrt(gauss->variance));
    for (Eigen::Index i = 0; i < count; ++i) v[i] = n(g);
  } else if (const auto* mix = std::get_if<GmmNoise>(&model)) {
    std::bernoulli_distribution outlier(mix->c);
    std::normal_distribution<double> general(0.0, std::sqrt(mix->sigma_a_sq / mix->divisor));
    std::normal_distribution<double> heavy(0.0, std::sqrt(mix->sigma_b_sq));
    for (Eigen::Index i = 0; i < count; ++i)
      v[i] = outlier(g) ? heavy(g) : general(g);
  } else {
    const auto& sas = std::get<AlphaStableNoise>(model);
    for (Eigen::Index i = 0; i < count; ++i)
      v[i] = detail::sample_sas(sas.alpha, sas.gamma, g);
  }
  return v;
}

struct NominalVariance {
  enum class Kind { Finite, Infinite } kind = Kind::Finite;
  double value = 0.0;  // meaningful only when finite

  bool is_finite() const { return kind == Kind::Finite; }
};

inline NominalVariance nominal_variance(const NoiseModel& model) {
  if (const auto* g = std::get_if<GaussianNoise>(&model))
    return {NominalVariance::Kind::Finite, g->variance};
  if (const auto* m = std::get_if<GmmNoise>(&model))
    return {NominalVariance::Kind::Finite,
            (1.0 - m->c) * m->sigma_a_sq / m->divisor + m->c * m->sigma_b_sq};
  const auto& a = std::get<AlphaStableNoise>(model);
  if (a.alpha == 2.0)
    return {NominalVariance::Kind::Finite, 2.0 * a.gamma * a.gamma};
  return {NominalVariance::Kind::Infinite, 0.0};
}

}  // namespace mccs
