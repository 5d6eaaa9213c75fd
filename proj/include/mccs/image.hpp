#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mccs/noise.hpp"
#include "mccs/parallel.hpp"
#include "mccs/problem.hpp"
#include "mccs/rng.hpp"
#include "mccs/solver.hpp"

// Block-based image compressive sensing: patching, orthonormal 2D DCT,
// top-s sparsification, measurement, normalization-aware reconstruction
// and PSNR.

namespace mccs {

// Orthonormal DCT-II matrix: D(0,j) = 1/sqrt(B), D(k,j) = sqrt(2/B) cos(pi (2j+1) k / 2B).
inline Eigen::MatrixXd dct_matrix(int b) {
  Eigen::MatrixXd d(b, b);
  const double c0 = 1.0 / std::sqrt(static_cast<double>(b));
  const double ck = std::sqrt(2.0 / static_cast<double>(b));
  for (int k = 0; k < b; ++k)
    for (int j = 0; j < b; ++j)
      d(k, j) = (k == 0 ? c0 : ck) *
                std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * b));
  return d;
}

inline Eigen::MatrixXd dct2(const Eigen::MatrixXd& block) {
  if (block.rows() != block.cols()) throw std::invalid_argument("dct2: block must be square");
  const Eigen::MatrixXd d = dct_matrix(static_cast<int>(block.rows()));
  return d * block * d.transpose();
}

inline Eigen::MatrixXd idct2(const Eigen::MatrixXd& coeffs) {
  if (coeffs.rows() != coeffs.cols()) throw std::invalid_argument("idct2: block must be square");
  const Eigen::MatrixXd d = dct_matrix(static_cast<int>(coeffs.rows()));
  return d.transpose() * coeffs * d;
}

// Keep the s largest-magnitude entries, zero the rest. Ties broken toward
// the lower index.
inline Eigen::VectorXd sparsify_top_s(const Eigen::VectorXd& coeffs, int s) {
  const int n = static_cast<int>(coeffs.size());
  if (s < 1 || s > n) throw std::invalid_argument("sparsify_top_s: s out of range");
  if (s == n) return coeffs;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(coeffs[a]) > std::abs(coeffs[b]);
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < s; ++i) out[idx[i]] = coeffs[idx[i]];
  return out;
}

// Peak-255 PSNR over the full image; +inf when the images agree to within
// max-abs 1e-6.
inline double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double peak = 255.0) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("psnr: size mismatch");
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse <= 1e-12) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

// Edge-replicated padding up to a multiple of the patch size.
inline Eigen::MatrixXd pad_to_multiple(const Eigen::MatrixXd& img, int b) {
  const Eigen::Index h = img.rows(), w = img.cols();
  const Eigen::Index hp = (h + b - 1) / b * b;
  const Eigen::Index wp = (w + b - 1) / b * b;
  if (hp == h && wp == w) return img;
  Eigen::MatrixXd out(hp, wp);
  for (Eigen::Index i = 0; i < hp; ++i)
    for (Eigen::Index j = 0; j < wp; ++j)
      out(i, j) = img(std::min(i, h - 1), std::min(j, w - 1));
  return out;
}

enum class ImageSensing { Gaussian, Identity };

struct ImageCsConfig {
  int patch_size = 32;
  int s = 0;        // retained coefficients; 0 means B^2 (no sparsification)
  int m_img = 500;  // measurements per block
  ImageSensing sensing = ImageSensing::Gaussian;
  std::optional<NoiseModel> noise;  // nullopt = noiseless
  SolverConfig solver;
  unsigned threads = 0;
};

struct BlockReport {
  int index = 0;
  std::int64_t updates_used = 0;
  bool diverged = false;
  double wall_time_s = 0.0;
};

struct ImageResult {
  Eigen::MatrixXd reconstructed;
  double psnr_db = 0.0;
  std::vector<BlockReport> blocks;
};

// Full pipeline per block: DCT, optional top-s sparsification, measure,
// add noise, divide y by its Euclidean norm, solve, scale the recovered
// coefficients back, inverse DCT. One sensing matrix is drawn once and
// shared by all blocks.
inline ImageResult reconstruct_image(const Eigen::MatrixXd& image, const ImageCsConfig& cfg,
                                     std::uint64_t seed) {
  const int b = cfg.patch_size;
  if (b < 1) throw std::invalid_argument("reconstruct_image: patch size must be positive");
  const int n = b * b;
  const int s = cfg.s > 0 ? cfg.s : n;
  if (s > n) throw std::invalid_argument("reconstruct_image: s exceeds B^2");
  if (cfg.sensing == ImageSensing::Identity && cfg.m_img != n)
    throw std::invalid_argument("reconstruct_image: identity sensing requires M = B^2");

  const Eigen::MatrixXd padded = pad_to_multiple(image, b);
  const int bh = static_cast<int>(padded.rows()) / b;
  const int bw = static_cast<int>(padded.cols()) / b;
  const int n_blocks = bh * bw;

  SensingMatrix phi;
  if (cfg.sensing == ImageSensing::Gaussian) {
    phi = generate_sensing_matrix(cfg.m_img, n, MatrixKind::GaussianIID,
                                  1.0 / static_cast<double>(cfg.m_img),
                                  rng::derive(seed, 0x5eed));
  } else {
    phi.entries = RowMatrixXd::Identity(n, n);
    phi.kind = MatrixKind::GaussianIID;
    phi.entry_variance = 1.0;
  }

  if (cfg.noise) validate(*cfg.noise);

  Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(padded.rows(), padded.cols());
  std::vector<BlockReport> reports(n_blocks);

  const unsigned threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  parallel_for(static_cast<std::size_t>(n_blocks), threads, [&](std::size_t blk) {
    const auto t0 = std::chrono::steady_clock::now();
    const int bi = static_cast<int>(blk) / bw;
    const int bj = static_cast<int>(blk) % bw;
    const Eigen::MatrixXd block = padded.block(bi * b, bj * b, b, b);

    Eigen::VectorXd coeffs = Eigen::Map<const Eigen::VectorXd>(dct2(block).eval().data(), n);
    if (s < n) coeffs = sparsify_top_s(coeffs, s);

    Eigen::VectorXd y = phi.entries * coeffs;
    if (cfg.noise)
      y += sample_noise(*cfg.noise, cfg.m_img, rng::derive(seed, 0x6e01, blk));

    BlockReport rep;
    rep.index = static_cast<int>(blk);
    Eigen::VectorXd rec_coeffs = Eigen::VectorXd::Zero(n);
    const double norm_factor = y.norm();
    if (norm_factor > 0.0) {
      ReconstructionProblem problem{phi, y / norm_factor, std::nullopt};
      try {
        auto result = run(problem, cfg.solver, rng::derive(seed, 0x501e, blk));
        rec_coeffs = result.w * norm_factor;
        rep.updates_used = result.trace.updates_used;
      } catch (const DivergenceError& e) {
        rep.diverged = true;  // block falls back to the zero-coefficient reconstruction
        rep.updates_used = e.iteration();
      }
    }
    const Eigen::MatrixXd rec_block =
        idct2(Eigen::Map<const Eigen::MatrixXd>(rec_coeffs.data(), b, b));
    recon.block(bi * b, bj * b, b, b) = rec_block;
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports[blk] = rep;
  });

  ImageResult result;
  result.reconstructed = recon.topLeftCorner(image.rows(), image.cols());
  result.psnr_db = psnr(image, result.reconstructed);
  result.blocks = std::move(reports);
  return result;
}

// Deterministic grayscale test pattern in [0, 255]; stands in for natural
// test images which are not distributed with the project.
inline Eigen::MatrixXd make_synthetic_image(int h, int w) {
  Eigen::MatrixXd img(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double x = static_cast<double>(j) / w;
      const double y = static_cast<double>(i) / h;
      double v = 128.0 + 60.0 * std::sin(2.0 * std::numbers::pi * 3.0 * x) *
                             std::cos(2.0 * std::numbers::pi * 2.0 * y);
      v += 40.0 * std::exp(-25.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
      const double r = std::hypot(x - 0.25, y - 0.7);
      if (r < 0.12) v = 220.0;
      img(i, j) = std::clamp(v, 0.0, 255.0);
    }
  return img;
}

}  // namespace mccs
