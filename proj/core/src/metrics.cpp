#include "soz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "soz/error.hpp"

namespace soz {

ConfusionMetrics confusion_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::LengthMismatch, "y_true and y_pred differ in length");
  }
  if (y_true.empty()) throw Error(Errc::EmptyInput, "no predictions to score");
  double cm[2][2] = {{0, 0}, {0, 0}};  // [true][pred]
  for (std::size_t i = 0; i < y_true.size(); ++i) cm[y_true[i] != 0][y_pred[i] != 0] += 1.0;
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  double p = 0.0;
  double r = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double tp = cm[c][c];
    const double fp = cm[1 - c][c];
    const double fn = cm[c][1 - c];
    p += ratio(tp, tp + fp);
    r += ratio(tp, tp + fn);
  }
  ConfusionMetrics out;
  out.macro_precision = p / 2.0;
  out.macro_recall = r / 2.0;
  out.accuracy = (cm[0][0] + cm[1][1]) / static_cast<double>(y_true.size());
  return out;
}

double roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw Error(Errc::LengthMismatch, "labels and scores differ in length");
  }
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (std::isnan(s)) throw Error(Errc::NonFiniteValue, "NaN score");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0;
  double rank_sum = 0.0;  // 1-based ranks of the positives
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[idx[k]] != 0) {
        pos += 1.0;
        rank_sum += avg;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(Errc::SingleClass, "ROC AUC needs both classes");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

ProbaMatrix soft_ensemble(const std::vector<ProbaMatrix>& members) {
  if (members.empty()) throw Error(Errc::EmptyInput, "no ensemble members");
  const std::size_t rows = members.front().rows();
  for (const auto& m : members) {
    if (m.rows() != rows) throw Error(Errc::ShapeMismatch, "ensemble members differ in row count");
  }
  ProbaMatrix out(rows);
  const double k = static_cast<double>(members.size());
  std::vector<double> cell(members.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      // Summing in sorted order makes the mean independent of member order.
      for (std::size_t m = 0; m < members.size(); ++m) cell[m] = members[m](i, c);
      std::sort(cell.begin(), cell.end());
      out(i, c) = std::accumulate(cell.begin(), cell.end(), 0.0) / k;
    }
  }
  return out;
}

}  // namespace soz
