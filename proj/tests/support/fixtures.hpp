#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "soz/dataset.hpp"
#include "soz/splits.hpp"
#include "soz/synthgen.hpp"

namespace fixture {

/// `n_series` columns named t000.. followed by `n_meta` columns m0, m1, ...
inline std::vector<std::string> columns(std::size_t n_series, std::size_t n_meta) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_series; ++i) names.push_back(soz::series_column_name(i));
  for (std::size_t i = 0; i < n_meta; ++i) names.push_back("m" + std::to_string(i));
  return names;
}

/// Matrix with all rows under patient "P".
inline soz::FeatureMatrix matrix(std::vector<std::string> names, std::vector<double> values,
                                 std::vector<int> labels) {
  std::vector<std::string> keys(labels.size(), "P");
  return soz::FeatureMatrix(std::move(names), std::move(values), std::move(labels),
                            std::move(keys));
}

/// Gaussian features; label = 1 with probability `pos_rate`.
inline soz::FeatureMatrix random_matrix(std::size_t n, std::size_t n_series, std::size_t n_meta,
                                        double pos_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(pos_rate);
  const std::size_t d = n_series + n_meta;
  std::vector<double> v(n * d);
  for (double& x : v) x = z(rng);
  std::vector<int> y(n);
  for (int& l : y) l = coin(rng) ? 1 : 0;
  return matrix(columns(n_series, n_meta), std::move(v), std::move(y));
}

/// Linearly separable 2-D points (label = x0 + x1 > 0) with a margin.
inline soz::FeatureMatrix separable_2d(std::size_t n, std::uint64_t seed, double margin = 0.2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v;
  std::vector<int> y;
  while (y.size() < n) {
    const double a = u(rng);
    const double b = u(rng);
    if (std::abs(a + b) < margin) continue;
    v.push_back(a);
    v.push_back(b);
    y.push_back(a + b > 0 ? 1 : 0);
  }
  return matrix({"x0", "x1"}, std::move(v), std::move(y));
}

/// Small generator config: `patients` patients with `electrodes` electrodes.
inline soz::GenConfig small_gen(int patients, int electrodes, std::uint64_t seed = 3) {
  soz::GenConfig g;
  g.n_patients = patients;
  g.electrodes_min = electrodes;
  g.electrodes_max = electrodes;
  g.soz_fraction = 0.25;
  g.seed = seed;
  return g;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("soz_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
