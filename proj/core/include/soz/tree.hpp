#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <vector>

#include "soz/dataset.hpp"
#include "soz/rng.hpp"

namespace soz {

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

/// Internal nodes send x left iff x[feature] < threshold. Leaves carry P(class
/// 1) for bagged trees or an additive score for boosted trees.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const noexcept {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  /// Longest root-to-leaf path, in edges.
  std::size_t depth() const;
  /// (feature, threshold) of the internal nodes at each depth.
  std::vector<std::vector<std::pair<int, double>>> splits_by_depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Training matrix laid out for split search. Each feature gets sorted cut
/// points; bin(x) = number of cuts <= x, so "bin <= b" is "x < cuts[b]".
/// Up to `exact_limit` rows the cuts sit between every pair of adjacent
/// distinct values (exact search); above it at most `max_bins` quantile bins.
class ColumnStore {
 public:
  static constexpr std::size_t kExactLimit = 10'000;
  static constexpr std::size_t kMaxQuantileBins = 256;

  explicit ColumnStore(const FeatureMatrix& m, std::size_t exact_limit = kExactLimit,
                       std::size_t max_bins = kMaxQuantileBins);

  std::size_t rows() const noexcept { return n_; }
  std::size_t features() const noexcept { return d_; }
  bool exact() const noexcept { return exact_; }

  const double* column(std::size_t f) const noexcept { return raw_.data() + f * n_; }
  const std::uint16_t* bins(std::size_t f) const noexcept { return bins_.data() + f * n_; }
  const std::vector<double>& cuts(std::size_t f) const noexcept { return cuts_[f]; }
  std::size_t bin_count(std::size_t f) const noexcept { return cuts_[f].size() + 1; }
  std::size_t max_bin_count() const noexcept { return max_bin_count_; }

  /// Row indices ordered by bin (ties by row index); built on first use.
  const std::vector<std::uint32_t>& sorted_rows(std::size_t f) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  bool exact_ = true;
  std::size_t max_bin_count_ = 1;
  std::vector<double> raw_;
  std::vector<std::uint16_t> bins_;
  std::vector<std::vector<double>> cuts_;
  mutable std::vector<std::vector<std::uint32_t>> sorted_;
  mutable std::once_flag sorted_once_;
};

struct CartParams {
  std::size_t max_depth = kUnlimitedDepth;
  std::size_t mtry = 0;  // 0 = all features
  bool random_thresholds = false;
  std::size_t min_samples_split = 2;
};

/// Gini CART on weighted rows (weights are bootstrap multiplicities; zero
/// drops the row). Impure nodes split on the best candidate even at zero
/// gain, stopping only at max depth, purity, or when no candidate feature
/// varies. With random_thresholds each candidate gets one uniform threshold
/// between the node's min and max.
DecisionTree grow_classification_tree(const ColumnStore& data, std::span<const int> labels,
                                      std::span<const std::uint32_t> weights,
                                      const CartParams& params, Rng& rng);

struct BoostTreeParams {
  std::size_t max_depth = 6;
  double lambda = 1.0;
  double gamma = 0.0;
  bool oblivious = false;
};

/// Second-order regression tree on (gradient, hessian) pairs. Split gain
///   1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma
/// must be positive; leaves hold -G/(H+l). Oblivious trees use one shared
/// split per level, chosen by the gain summed across that level's nodes.
DecisionTree grow_boosting_tree(const ColumnStore& data, std::span<const double> grad,
                                std::span<const double> hess, const BoostTreeParams& params);

/// -G/(H+lambda), or 0 when the denominator vanishes.
double leaf_weight(double g_sum, double h_sum, double lambda) noexcept;

/// 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] - gamma
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) noexcept;

}  // namespace soz
