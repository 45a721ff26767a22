#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "soz/dataset.hpp"

namespace soz {

/// n x 2 class-probability matrix; row i is (P(class 0), P(class 1)).
class ProbaMatrix {
 public:
  ProbaMatrix() = default;
  explicit ProbaMatrix(std::size_t rows) : data_(2 * rows, 0.0) {}

  std::size_t rows() const noexcept { return data_.size() / 2; }
  double operator()(std::size_t i, std::size_t c) const noexcept { return data_[2 * i + c]; }
  double& operator()(std::size_t i, std::size_t c) noexcept { return data_[2 * i + c]; }
  /// Sets row i to (1 - p1, p1).
  void set_positive(std::size_t i, double p1) noexcept {
    data_[2 * i] = 1.0 - p1;
    data_[2 * i + 1] = p1;
  }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double> positive_column() const;

  bool operator==(const ProbaMatrix&) const = default;

 private:
  std::vector<double> data_;
};

/// Probabilities, hard labels and ranking scores for one matrix.
struct Prediction {
  ProbaMatrix proba;
  std::vector<int> labels;
  std::vector<double> scores;
};

/// A fitted binary classifier. Fitted models are immutable; prediction is
/// const and safe to call concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ProbaMatrix predict_proba(const FeatureMatrix& x) const = 0;

  /// Ranking score used for ROC AUC. Defaults to P(class 1).
  virtual std::vector<double> decision_scores(const FeatureMatrix& x) const;

  /// Hard labels: class 1 iff P(class 1) > P(class 0); ties go to class 0.
  virtual std::vector<int> predict_labels(const FeatureMatrix& x) const;

  /// All three of the above from a single pass where possible.
  virtual Prediction predict(const FeatureMatrix& x) const;
};

std::vector<int> argmax_labels(const ProbaMatrix& p);

}  // namespace soz
