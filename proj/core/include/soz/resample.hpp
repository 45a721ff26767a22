#pragma once

#include <cstddef>
#include <cstdint>

#include "soz/splits.hpp"

namespace soz {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

/// SMOTE to exact class parity. Output = every input row (unchanged, in
/// order) followed by N_maj - N_min synthetic minority rows, each
///   x + lambda (x_nn - x),  lambda ~ U[0, 1],
/// where x_nn is one of x's k nearest minority neighbours (Euclidean, all
/// columns, ties to the lower row index). Base rows are visited round-robin
/// in minority-row order. Synthetic rows inherit the base row's patient key
/// and are flagged in origins().
TrainFold smote(const TrainFold& train, const SmoteConfig& cfg);

/// Indices (into `rows`) of the k nearest neighbours of rows[i] among `rows`,
/// excluding i itself. Brute force; exposed for testing.
std::vector<std::size_t> nearest_neighbors(const FeatureMatrix& m,
                                           const std::vector<std::size_t>& rows, std::size_t i,
                                           std::size_t k);

}  // namespace soz
