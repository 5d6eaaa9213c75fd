#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Correntropy kernel evaluation and the annealed kernel-width schedule.

namespace mccs {

// Unnormalized Gaussian kernel exp(-e^2 / (2 sigma^2)), in (0, 1].
inline double kernel_weight(double e, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel_weight: sigma must be positive");
  const double r = e / sigma;
  return std::exp(-0.5 * r * r);
}

struct KernelSchedule {
  double sigma_max = 0.0;   // <= 0 means "estimate from measurements at run start"
  double sigma_min = 0.03;
  double theta = 20.0;      // exponential decay rate
  std::int64_t max_updates = 10000;  // C
};

// sigma(i) = sigma_max * exp(-theta * i / C) + sigma_min
inline double anneal_sigma(std::int64_t i, const KernelSchedule& s) {
  return s.sigma_max * std::exp(-s.theta * static_cast<double>(i) /
                                static_cast<double>(s.max_updates)) +
         s.sigma_min;
}

// Type-7 quantile: linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("quantile: empty input");
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

// sigma_max = 0.5 * (y_(0.875) - y_(0.125)) - sigma_min, floored at a
// small positive value when the spread is degenerate.
inline double estimate_sigma_max(const Eigen::VectorXd& y, double sigma_min) {
  if (y.size() < 2) throw std::invalid_argument("estimate_sigma_max: need at least 2 measurements");
  std::vector<double> s(y.data(), y.data() + y.size());
  std::sort(s.begin(), s.end());
  const double raw = 0.5 * (quantile_sorted(s, 0.875) - quantile_sorted(s, 0.125)) - sigma_min;
  return raw > 0.0 ? raw : 1e-3;
}

}  // namespace mccs
