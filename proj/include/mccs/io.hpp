#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mccs/problem.hpp"

// File formats: reconstruction problems (binary container + CSV), 8-bit
// grayscale PGM and plain matrix CSV.

namespace mccs::io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix_csv(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) f << ',';
      f << format_double(m(i, j));
    }
    f << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged CSV: " + path);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

// CSV form of a problem: sensing matrix row-per-line, measurements one
// column.
inline void save_problem_csv(const ReconstructionProblem& p, const std::string& phi_path,
                             const std::string& y_path) {
  write_matrix_csv(phi_path, p.phi.entries);
  write_matrix_csv(y_path, p.y);
}

namespace detail {
template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
}  // namespace detail

inline void save_problem_binary(const ReconstructionProblem& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write("MCCSPRB1", 8);
  detail::put<std::int64_t>(f, p.phi.rows());
  detail::put<std::int64_t>(f, p.phi.cols());
  detail::put<std::uint8_t>(f, static_cast<std::uint8_t>(p.phi.kind));
  detail::put<double>(f, p.phi.entry_variance);
  f.write(reinterpret_cast<const char*>(p.phi.entries.data()),
          sizeof(double) * p.phi.entries.size());
  f.write(reinterpret_cast<const char*>(p.y.data()), sizeof(double) * p.y.size());
  detail::put<std::uint8_t>(f, p.truth ? 1 : 0);
  if (p.truth) {
    detail::put<std::int32_t>(f, p.truth->n);
    detail::put<std::int32_t>(f, p.truth->k);
    f.write(reinterpret_cast<const char*>(p.truth->values.data()),
            sizeof(double) * p.truth->values.size());
    for (int s : p.truth->support) detail::put<std::int32_t>(f, s);
  }
}

inline ReconstructionProblem load_problem_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::string(magic, 8) != "MCCSPRB1") throw std::runtime_error("bad problem file: " + path);
  const auto m = detail::get<std::int64_t>(f);
  const auto n = detail::get<std::int64_t>(f);
  ReconstructionProblem p;
  p.phi.kind = static_cast<MatrixKind>(detail::get<std::uint8_t>(f));
  p.phi.entry_variance = detail::get<double>(f);
  p.phi.entries.resize(m, n);
  f.read(reinterpret_cast<char*>(p.phi.entries.data()), sizeof(double) * m * n);
  p.y.resize(m);
  f.read(reinterpret_cast<char*>(p.y.data()), sizeof(double) * m);
  if (detail::get<std::uint8_t>(f)) {
    SparseSignal x;
    x.n = detail::get<std::int32_t>(f);
    x.k = detail::get<std::int32_t>(f);
    x.values.resize(x.n);
    f.read(reinterpret_cast<char*>(x.values.data()), sizeof(double) * x.n);
    x.support.resize(x.k);
    for (int& s : x.support) s = detail::get<std::int32_t>(f);
    p.truth = std::move(x);
  }
  if (!f) throw std::runtime_error("truncated problem file: " + path);
  return p;
}

// 8-bit grayscale PGM, binary (P5) on write; P5 or P2 on read.
inline void write_pgm(const std::string& path, const Eigen::MatrixXd& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < img.rows(); ++i)
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const int v = static_cast<int>(std::lround(std::clamp(img(i, j), 0.0, 255.0)));
      f.put(static_cast<char>(v));
    }
}

inline Eigen::MatrixXd read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P2") throw std::runtime_error("not a PGM file: " + path);
  auto next_token = [&]() {
    std::string tok;
    while (f >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(f, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("truncated PGM header: " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (maxval != 255) throw std::runtime_error("only 8-bit PGM supported: " + path);
  Eigen::MatrixXd img(h, w);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("truncated PGM data: " + path);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) img(i, j) = buf[static_cast<std::size_t>(i) * w + j];
  } else {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        int v;
        if (!(f >> v)) throw std::runtime_error("truncated PGM data: " + path);
        img(i, j) = v;
      }
  }
  return img;
}

}  // namespace mccs::io
