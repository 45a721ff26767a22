#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "soz/model.hpp"
#include "soz/tree.hpp"

namespace soz {

struct ForestConfig {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 12;
  std::size_t mtry = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Bagged classification trees. predict_proba averages the per-tree leaf
/// class frequencies.
class ForestModel final : public Classifier {
 public:
  ProbaMatrix predict_proba(const FeatureMatrix& x) const override;

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  std::size_t feature_count() const noexcept { return cols_; }

 private:
  friend ForestModel fit_forest(const FeatureMatrix&, const ForestConfig&, bool);

  std::vector<DecisionTree> trees_;
  std::size_t cols_ = 0;
};

/// Random forest: bootstrap resamples, best Gini split over mtry features.
ForestModel fit_random_forest(const FeatureMatrix& train, ForestConfig cfg);

/// Extremely randomized trees: one random threshold per candidate feature,
/// no bootstrap.
ForestModel fit_extra_trees(const FeatureMatrix& train, ForestConfig cfg);

/// Shared implementation; `cfg.bootstrap` is honoured as given.
ForestModel fit_forest(const FeatureMatrix& train, const ForestConfig& cfg,
                       bool random_thresholds);

/// Throws SingleClass unless both labels occur.
void require_both_classes(const std::vector<int>& labels);

}  // namespace soz
