#pragma once

#include <span>
#include <vector>

#include "soz/model.hpp"

namespace soz {

struct ConfusionMetrics {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double accuracy = 0.0;
};

/// Per-class precision and recall averaged over classes 0 and 1; an empty
/// denominator contributes 0.
ConfusionMetrics confusion_metrics(std::span<const int> y_true, std::span<const int> y_pred);

/// Mann-Whitney AUC from average ranks; tied scores count one half.
double roc_auc(std::span<const int> y_true, std::span<const double> scores);

/// Element-wise mean of probability matrices.
ProbaMatrix soft_ensemble(const std::vector<ProbaMatrix>& members);

}  // namespace soz
