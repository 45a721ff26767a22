#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "soz/model.hpp"

namespace soz {

inline constexpr std::size_t kUnboundedBand = std::numeric_limits<std::size_t>::max();

struct DtwConfig {
  std::size_t band_radius = 10;  // Sakoe-Chiba radius in samples
  double meta_weight = 1.0;
  std::size_t k = 3;
  std::size_t train_subsample = 0;  // 0 keeps every training row
  std::uint64_t seed = 0;           // only used for subsampling
};

/// Banded DTW with squared local cost:
///   D(i,j) = (a_i - b_j)^2 + min(D(i-1,j), D(i,j-1), D(i-1,j-1))
/// over cells with |i - j| <= band_radius. Inputs may differ in length when
/// the band reaches the final cell.
double dtw(std::span<const double> a, std::span<const double> b, std::size_t band_radius);

/// As dtw(), but returns +inf as soon as every cell of a row exceeds
/// `cutoff` (the final cost can then only be larger).
double dtw_bounded(std::span<const double> a, std::span<const double> b,
                   std::size_t band_radius, double cutoff);

/// k-NN over dtw(series) + meta_weight * ||meta_a - meta_b||^2.
class KnnDtwModel final : public Classifier {
 public:
  ProbaMatrix predict_proba(const FeatureMatrix& x) const override;

  /// Indices into the stored rows of the k nearest neighbours of `x`, nearest
  /// first; ties go to the lower stored index.
  std::vector<std::size_t> neighbors(std::span<const double> x) const;

  double distance(std::span<const double> a, std::span<const double> b) const;

  std::size_t stored_rows() const noexcept { return labels_.size(); }
  const DtwConfig& config() const noexcept { return cfg_; }

 private:
  friend KnnDtwModel knn_fit(const FeatureMatrix&, const DtwConfig&);

  DtwConfig cfg_;
  std::vector<std::string> columns_;
  std::size_t series_cols_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> rows_;
  std::vector<int> labels_;
};

KnnDtwModel knn_fit(const FeatureMatrix& train, const DtwConfig& cfg);

}  // namespace soz
