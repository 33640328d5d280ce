#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "insane/dataspace.hpp"
#include "insane/types.hpp"
#include "oracles.hpp"

namespace testing_util {

inline insane::Matrix to_matrix(const oracle::Points& p) {
  insane::Matrix m(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p[0].size()));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[i][j];
  return m;
}

inline oracle::Points to_points(const insane::Matrix& m) {
  oracle::Points p(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return p;
}

inline oracle::Points random_points(std::uint64_t seed, int n, int d, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  oracle::Points p(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
  for (auto& row : p)
    for (auto& v : row) v = g(rng);
  return p;
}

/// Small dataset with a ramp image and spectra filled by `f(row, col, t)`.
template <typename F>
insane::GridDataset make_dataset(int h, int w, int t, F&& f) {
  insane::GridDataset ds;
  ds.height = h;
  ds.width = w;
  ds.waveform = insane::triangular_waveform(static_cast<std::size_t>(t));
  ds.image.resize(static_cast<std::size_t>(h * w));
  ds.spectra.resize(static_cast<std::size_t>(h * w * t));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      ds.image[static_cast<std::size_t>(r * w + c)] = static_cast<float>(r * w + c);
      for (int k = 0; k < t; ++k)
        ds.spectra[static_cast<std::size_t>((r * w + c) * t + k)] = static_cast<float>(f(r, c, k));
    }
  return ds;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("insane_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_util
