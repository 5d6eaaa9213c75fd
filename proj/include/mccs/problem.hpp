#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mccs/rng.hpp"

// Sparse ground-truth signals, sensing matrices and the reconstruction
// problem container y = Phi x + v.

namespace mccs {

// Row-major so the per-iteration row phi(i) is contiguous.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SparseSignal {
  Eigen::VectorXd values;        // length N, exactly K nonzeros
  std::vector<int> support;      // sorted nonzero indices, size K
  int n = 0;
  int k = 0;
};

enum class MatrixKind { GaussianIID, Rademacher };

struct SensingMatrix {
  RowMatrixXd entries;  // M x N
  MatrixKind kind = MatrixKind::GaussianIID;
  double entry_variance = 1.0;  // sigma_a^2

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

struct ReconstructionProblem {
  SensingMatrix phi;
  Eigen::VectorXd y;
  std::optional<SparseSignal> truth;  // present in simulation only
};

enum class NonzeroDist { UniformSym, UniformAnnulus };

// K nonzeros at uniformly-random distinct positions. Support is chosen by
// partial Fisher-Yates, values are drawn afterwards.
inline SparseSignal generate_sparse_signal(int n, int k, NonzeroDist dist,
                                           bool normalize, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("generate_sparse_signal: K must be >= 1");
  if (k > n) throw std::invalid_argument("generate_sparse_signal: K must not exceed N");
  auto g = rng::make_stream(seed);

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(g)]);
  }
  std::vector<int> support(idx.begin(), idx.begin() + k);
  std::sort(support.begin(), support.end());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s : support) {
    double v;
    if (dist == NonzeroDist::UniformSym) {
      v = 2.0 * unif(g) - 1.0;
    } else {
      v = 0.5 + 0.5 * unif(g);          // magnitude in [0.5, 1]
      if (unif(g) < 0.5) v = -v;
    }
    x[s] = v;
  }
  if (normalize) {
    const double norm = x.norm();
    if (norm > 0.0) x /= norm;
  }
  return {std::move(x), std::move(support), n, k};
}

inline SensingMatrix generate_sensing_matrix(int m, int n, MatrixKind kind,
                                             double entry_variance,
                                             std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("generate_sensing_matrix: dimensions must be positive");
  if (!(entry_variance > 0.0)) throw std::invalid_argument("generate_sensing_matrix: entry variance must be positive");
  auto g = rng::make_stream(seed);
  RowMatrixXd a(m, n);
  const double sigma_a = std::sqrt(entry_variance);
  if (kind == MatrixKind::GaussianIID) {
    std::normal_distribution<double> norm(0.0, sigma_a);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = norm(g);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = coin(g) ? sigma_a : -sigma_a;
  }
  return {std::move(a), kind, entry_variance};
}

inline Eigen::VectorXd measure(const SensingMatrix& phi, const Eigen::VectorXd& x,
                               const std::optional<Eigen::VectorXd>& noise = std::nullopt) {
  if (x.size() != phi.cols()) throw std::invalid_argument("measure: signal length does not match sensing matrix");
  Eigen::VectorXd y = phi.entries * x;
  if (noise) {
    if (noise->size() != y.size()) throw std::invalid_argument("measure: noise length does not match measurement count");
    y += *noise;
  }
  return y;
}

inline Eigen::VectorXd measure(const SensingMatrix& phi, const SparseSignal& x,
                               const std::optional<Eigen::VectorXd>& noise = std::nullopt) {
  return measure(phi, x.values, noise);
}

// One-based row index k = mod(i, M) + 1 for recursive data reuse.
inline int recursive_index(std::int64_t i, int m) {
  if (m < 1) throw std::invalid_argument("recursive_index: M must be >= 1");
  return static_cast<int>(i % m) + 1;
}

}  // namespace mccs
