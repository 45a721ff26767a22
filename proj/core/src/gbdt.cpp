#include "soz/gbdt.hpp"

#include <cmath>

#include "soz/error.hpp"
#include "soz/forest.hpp"
#include "soz/parallel.hpp"

namespace soz {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(const std::vector<double>& margins, const std::vector<int>& labels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    // log(1 + e^F) - y F, written to avoid overflow.
    const double f = margins[i];
    const double softplus = f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
    sum += softplus - (labels[i] ? f : 0.0);
  }
  return sum / static_cast<double>(margins.size());
}

GbdtModel fit_gbdt(const FeatureMatrix& train, const BoostConfig& cfg) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
    throw Error(Errc::InvalidConfig, "learning_rate must lie in (0, 1]");
  }
  if (!(cfg.lambda >= 0.0)) throw Error(Errc::InvalidConfig, "lambda must be >= 0");
  require_both_classes(train.labels());

  const std::size_t n = train.rows();
  const auto& y = train.labels();
  double pos = 0.0;
  for (int v : y) pos += v;
  const double p = pos / static_cast<double>(n);

  GbdtModel model;
  model.base_ = std::log(p / (1.0 - p));
  model.eta_ = cfg.learning_rate;
  model.cols_ = train.cols();
  model.trees_.reserve(cfg.n_estimators);

  std::vector<double> f(n, model.base_);
  model.loss_.push_back(logistic_loss(f, y));
  if (cfg.n_estimators == 0) return model;

  const ColumnStore store(train);
  BoostTreeParams params;
  params.max_depth = cfg.max_depth;
  params.lambda = cfg.lambda;
  params.gamma = cfg.gamma;
  params.oblivious = cfg.oblivious;

  std::vector<double> g(n);
  std::vector<double> h(n);
  for (std::size_t m = 0; m < cfg.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sigmoid(f[i]);
      g[i] = s - y[i];
      h[i] = s * (1.0 - s);
      if (!std::isfinite(g[i]) || !std::isfinite(h[i])) {
        throw Error(Errc::NonFiniteGradient, "non-finite gradient at row " + std::to_string(i) +
                                                 " in round " + std::to_string(m));
      }
    }
    DecisionTree tree = grow_boosting_tree(store, g, h, params);
    parallel_for(n, [&](std::size_t i) { f[i] += cfg.learning_rate * tree.predict(train.row(i)); });
    model.trees_.push_back(std::move(tree));
    model.loss_.push_back(logistic_loss(f, y));
  }
  return model;
}

std::vector<double> GbdtModel::margins(const FeatureMatrix& x) const {
  if (x.cols() != cols_) throw Error(Errc::ColumnMismatch, "feature count differs from training");
  std::vector<double> out(x.rows(), base_);
  parallel_for(x.rows(), [&](std::size_t i) {
    const auto row = x.row(i);
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(row);
    out[i] += eta_ * sum;
  });
  return out;
}

ProbaMatrix GbdtModel::predict_proba(const FeatureMatrix& x) const {
  const auto f = margins(x);
  ProbaMatrix out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out.set_positive(i, sigmoid(f[i]));
  return out;
}

}  // namespace soz
