#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Sufficient step-size bounds for mean-square stability and the closed
// forms P_H / P_K behind the Gaussian-sensing bounds.

namespace mccs {

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string("stability: ") + name + " must be positive");
}
}  // namespace detail

// Rademacher sensing: mu < 2 / (N sigma_a^2).
inline double bound_rademacher(int n, double sigma_a_sq) {
  detail::require_positive(static_cast<double>(n), "N");
  detail::require_positive(sigma_a_sq, "sigma_a_sq");
  return 2.0 / (static_cast<double>(n) * sigma_a_sq);
}

// Gaussian sensing, bounded noise |v| <= v_max:
// mu < 2 / ((N + 4 + v_max^2 / (4 sigma^2)) sigma_a^2).
inline double bound_gaussian_sensing_bounded_noise(int n, double sigma_a_sq,
                                                   double sigma, double v_max) {
  detail::require_positive(static_cast<double>(n), "N");
  detail::require_positive(sigma_a_sq, "sigma_a_sq");
  detail::require_positive(sigma, "sigma");
  if (!(v_max >= 0.0)) throw std::invalid_argument("stability: v_max must be >= 0");
  const double factor = static_cast<double>(n) + 4.0 + v_max * v_max / (4.0 * sigma * sigma);
  return 2.0 / (factor * sigma_a_sq);
}

// Gaussian sensing, Gaussian noise: mu < 2 / ((N + 2) sigma_a^2).
inline double bound_gaussian_sensing_gaussian_noise(int n, double sigma_a_sq) {
  detail::require_positive(static_cast<double>(n), "N");
  detail::require_positive(sigma_a_sq, "sigma_a_sq");
  return 2.0 / ((static_cast<double>(n) + 2.0) * sigma_a_sq);
}

struct PhPk {
  double p_h;
  double p_k;
};

// Closed forms with a fixed noise realization v:
//   p = sigma^2 + sigma_a^2 |wtilde|^2
//   q = p sigma^2 + sigma_a^2 |wtilde|^2 v^2
//   P_H = (sigma / sqrt(p)) (q / p^2) sigma_a^2 exp(-v^2 / 2p)
//   P_K = (sigma / sqrt(p)) [(N-1) q / p^2
//         + 2 sigma^2 (q + sigma_a^2 |wtilde|^2 v^2) / p^3
//         + q^2 / p^4] sigma_a^4 exp(-v^2 / 2p)
inline PhPk eval_ph_pk_bounded(int n, double sigma, double sigma_a_sq,
                               double v, double wtilde_norm_sq) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(sigma_a_sq, "sigma_a_sq");
  if (!(wtilde_norm_sq >= 0.0)) throw std::invalid_argument("stability: |wtilde|^2 must be >= 0");
  const double p = sigma * sigma + sigma_a_sq * wtilde_norm_sq;
  const double q = p * sigma * sigma + sigma_a_sq * wtilde_norm_sq * v * v;
  const double common = sigma / std::sqrt(p) * std::exp(-v * v / (2.0 * p));
  const double p2 = p * p;
  const double p_h = common * q / p2 * sigma_a_sq;
  const double bracket = (static_cast<double>(n) - 1.0) * q / p2 +
                         2.0 * sigma * sigma * (q + sigma_a_sq * wtilde_norm_sq * v * v) / (p2 * p) +
                         q * q / (p2 * p2);
  const double p_k = common * bracket * sigma_a_sq * sigma_a_sq;
  return {p_h, p_k};
}

// Closed forms with v ~ N(0, sigma_v^2) averaged out:
//   A = sigma_a^2 |wtilde|^2 + sigma^2 + sigma_v^2
//   P_H = sigma (sigma^2 + sigma_v^2) sigma_a^2 / A^{3/2}
//   P_K = (N-1) P_H sigma_a^2 + 3 P_H (sigma^2 + sigma_v^2) sigma_a^2 / A
inline PhPk eval_ph_pk_gaussian_noise(int n, double sigma, double sigma_a_sq,
                                      double sigma_v_sq, double wtilde_norm_sq) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(sigma_a_sq, "sigma_a_sq");
  if (!(sigma_v_sq >= 0.0)) throw std::invalid_argument("stability: sigma_v_sq must be >= 0");
  if (!(wtilde_norm_sq >= 0.0)) throw std::invalid_argument("stability: |wtilde|^2 must be >= 0");
  const double s2v = sigma * sigma + sigma_v_sq;
  const double a = sigma_a_sq * wtilde_norm_sq + s2v;
  const double p_h = sigma * s2v * sigma_a_sq / (a * std::sqrt(a));
  const double p_k = (static_cast<double>(n) - 1.0) * p_h * sigma_a_sq +
                     3.0 * p_h * s2v * sigma_a_sq / a;
  return {p_h, p_k};
}

}  // namespace mccs
