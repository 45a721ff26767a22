#include "soz/model.hpp"

namespace soz {

std::vector<double> ProbaMatrix::positive_column() const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = data_[2 * i + 1];
  return out;
}

std::vector<int> argmax_labels(const ProbaMatrix& p) {
  std::vector<int> out(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) out[i] = p(i, 1) > p(i, 0) ? 1 : 0;
  return out;
}

std::vector<double> Classifier::decision_scores(const FeatureMatrix& x) const {
  return predict_proba(x).positive_column();
}

std::vector<int> Classifier::predict_labels(const FeatureMatrix& x) const {
  return argmax_labels(predict_proba(x));
}

Prediction Classifier::predict(const FeatureMatrix& x) const {
  Prediction out;
  out.proba = predict_proba(x);
  out.labels = argmax_labels(out.proba);
  out.scores = out.proba.positive_column();
  return out;
}

}  // namespace soz
