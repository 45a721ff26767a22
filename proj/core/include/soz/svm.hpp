#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "soz/model.hpp"

namespace soz {

enum class KernelKind { poly, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  int degree = 5;
  double gamma = 1.0;
  double coef0 = 1.0;
};

/// poly: (gamma <x,z> + coef0)^degree; rbf: exp(-gamma ||x - z||^2).
double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> z);

struct SvmConfig {
  KernelKind kernel = KernelKind::rbf;
  int degree = 5;
  double gamma = 0.0;  // 0 = 1/d
  double coef0 = 1.0;
  double c = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 200;  // iteration cap = max_passes * n
  bool standardize = true;       // per-column z-score fitted on the training rows
  std::size_t cache_mb = 200;
  std::size_t train_subsample = 0;  // 0 keeps every row
  bool record_objective = false;
  std::uint64_t seed = 0;
};

class SvmModel final : public Classifier {
 public:
  /// Hard (0/1) rows from the sign of the decision score.
  ProbaMatrix predict_proba(const FeatureMatrix& x) const override;
  /// f(x) = sum_i alpha_i y_i k(x_i, x) + b
  std::vector<double> decision_scores(const FeatureMatrix& x) const override;
  std::vector<int> predict_labels(const FeatureMatrix& x) const override;
  Prediction predict(const FeatureMatrix& x) const override;

  double decision(std::span<const double> x) const;

  /// alpha for every training row (after subsampling), in row order.
  const std::vector<double>& alphas() const noexcept { return alpha_; }
  /// Training labels as -1/+1, aligned with alphas().
  const std::vector<int>& signed_labels() const noexcept { return y_; }
  double bias() const noexcept { return b_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::size_t support_count() const noexcept { return coef_.size(); }
  bool converged() const noexcept { return converged_; }
  std::size_t iterations() const noexcept { return iterations_; }
  /// Dual objective after each accepted update (when recorded), starting at 0.
  const std::vector<double>& objective_trace() const noexcept { return trace_; }
  /// Decision values on the training rows used for fitting.
  const std::vector<double>& train_decisions() const noexcept { return train_f_; }

 private:
  friend SvmModel svm_fit(const FeatureMatrix&, const SvmConfig&);

  std::vector<double> transform(std::span<const double> x) const;

  KernelSpec kernel_;
  std::size_t cols_ = 0;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> sv_;  // support vectors, row-major, already transformed
  std::vector<double> coef_;
  double b_ = 0.0;
  std::vector<double> alpha_;
  std::vector<int> y_;
  std::vector<double> train_f_;
  bool converged_ = false;
  std::size_t iterations_ = 0;
  std::vector<double> trace_;
};

SvmModel svm_fit(const FeatureMatrix& train, const SvmConfig& cfg);

}  // namespace soz
