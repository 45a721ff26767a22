#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "soz/model.hpp"
#include "soz/tree.hpp"

namespace soz {

struct BoostConfig {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  double lambda = 1.0;
  double gamma = 0.0;
  bool oblivious = false;
  std::uint64_t seed = 0;
};

/// Additive logistic model F(x) = F0 + eta * sum_m tree_m(x).
class GbdtModel final : public Classifier {
 public:
  ProbaMatrix predict_proba(const FeatureMatrix& x) const override;
  /// Raw margins F(x).
  std::vector<double> margins(const FeatureMatrix& x) const;

  double base_score() const noexcept { return base_; }
  double learning_rate() const noexcept { return eta_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  /// Mean training log-loss: entry 0 before the first round, entry m after round m.
  const std::vector<double>& train_loss() const noexcept { return loss_; }

 private:
  friend GbdtModel fit_gbdt(const FeatureMatrix&, const BoostConfig&);

  double base_ = 0.0;
  double eta_ = 0.1;
  std::size_t cols_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<double> loss_;
};

GbdtModel fit_gbdt(const FeatureMatrix& train, const BoostConfig& cfg);

double sigmoid(double z) noexcept;
/// Mean logistic loss of margins against 0/1 labels.
double logistic_loss(const std::vector<double>& margins, const std::vector<int>& labels);

}  // namespace soz
