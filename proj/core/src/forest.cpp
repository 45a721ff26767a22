#include "soz/forest.hpp"

#include <cmath>
#include <random>

#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/rng.hpp"

namespace soz {

void require_both_classes(const std::vector<int>& labels) {
  bool seen[2] = {false, false};
  for (int y : labels) seen[y != 0] = true;
  if (!seen[0] || !seen[1]) throw Error(Errc::SingleClass, "training labels contain one class");
}

ForestModel fit_forest(const FeatureMatrix& train, const ForestConfig& cfg,
                       bool random_thresholds) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (cfg.n_estimators < 1) throw Error(Errc::InvalidConfig, "n_estimators must be >= 1");
  require_both_classes(train.labels());

  const ColumnStore store(train);
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  CartParams params;
  params.max_depth = cfg.max_depth;
  params.mtry = cfg.mtry == 0
                    ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                    : cfg.mtry;
  params.random_thresholds = random_thresholds;

  ForestModel model;
  model.cols_ = d;
  model.trees_.resize(cfg.n_estimators);
  parallel_for(cfg.n_estimators, [&](std::size_t t) {
    Rng rng = make_rng(cfg.seed, {0xf04e57ULL, t});
    std::vector<std::uint32_t> weights(n, 1);
    if (cfg.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0u);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) ++weights[pick(rng)];
    }
    model.trees_[t] = grow_classification_tree(store, train.labels(), weights, params, rng);
  });
  return model;
}

ForestModel fit_random_forest(const FeatureMatrix& train, ForestConfig cfg) {
  return fit_forest(train, cfg, false);
}

ForestModel fit_extra_trees(const FeatureMatrix& train, ForestConfig cfg) {
  cfg.bootstrap = false;
  return fit_forest(train, cfg, true);
}

ProbaMatrix ForestModel::predict_proba(const FeatureMatrix& x) const {
  if (x.cols() != cols_) throw Error(Errc::ColumnMismatch, "feature count differs from training");
  ProbaMatrix out(x.rows());
  parallel_for(x.rows(), [&](std::size_t i) {
    const auto row = x.row(i);
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(row);
    out.set_positive(i, sum / static_cast<double>(trees_.size()));
  });
  return out;
}

}  // namespace soz
