#include "soz/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <random>

#include "soz/error.hpp"
#include "soz/forest.hpp"
#include "soz/parallel.hpp"
#include "soz/rng.hpp"

namespace soz {

namespace {

constexpr double kTau = 1e-12;

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

double kernel_raw(const KernelSpec& k, const double* x, const double* z, std::size_t d) {
  if (k.kind == KernelKind::poly) {
    const double base = k.gamma * dot(x, z, d) + k.coef0;
    double out = 1.0;
    for (int p = 0; p < k.degree; ++p) out *= base;
    return out;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = x[j] - z[j];
    s += diff * diff;
  }
  return std::exp(-k.gamma * s);
}

// Least-recently-used cache of kernel rows.
class KernelCache {
 public:
  KernelCache(const std::vector<double>& x, std::size_t n, std::size_t d, const KernelSpec& k,
              std::size_t budget_mb)
      : x_(x), n_(n), d_(d), k_(k), rows_(n), where_(n) {
    const std::size_t row_bytes = std::max<std::size_t>(n * sizeof(double), 1);
    capacity_ = std::max<std::size_t>(2, budget_mb * 1024 * 1024 / row_bytes);
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = kernel_raw(k_, row(i), row(i), d_);
  }

  const std::vector<double>& get(std::size_t i) {
    if (!rows_[i].empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return rows_[i];
    }
    if (lru_.size() >= capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      rows_[i].swap(rows_[victim]);
      std::vector<double>().swap(rows_[victim]);
    }
    std::vector<double>& out = rows_[i];
    out.resize(n_);
    parallel_for(n_, [&](std::size_t k) { out[k] = kernel_raw(k_, row(i), row(k), d_); });
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return out;
  }

  double diag(std::size_t i) const { return diag_[i]; }

 private:
  const double* row(std::size_t i) const { return x_.data() + i * d_; }

  const std::vector<double>& x_;
  std::size_t n_;
  std::size_t d_;
  const KernelSpec& k_;
  std::size_t capacity_ = 2;
  std::vector<std::vector<double>> rows_;
  std::vector<std::list<std::size_t>::iterator> where_;
  std::list<std::size_t> lru_;
  std::vector<double> diag_;
};

}  // namespace

double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) throw Error(Errc::DimMismatch, "kernel inputs differ in dimension");
  return kernel_raw(k, x.data(), z.data(), x.size());
}

SvmModel svm_fit(const FeatureMatrix& train, const SvmConfig& cfg) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (!(cfg.c > 0.0)) throw Error(Errc::InvalidConfig, "C must be > 0");
  if (!(cfg.tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be > 0");
  if (cfg.gamma < 0.0) throw Error(Errc::InvalidConfig, "gamma must be > 0");
  if (cfg.kernel == KernelKind::poly && cfg.degree < 1) {
    throw Error(Errc::InvalidConfig, "polynomial degree must be >= 1");
  }
  require_both_classes(train.labels());

  std::vector<std::size_t> rows(train.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (cfg.train_subsample > 0 && cfg.train_subsample < rows.size()) {
    Rng rng = make_rng(cfg.seed, {0x5b5ULL});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(cfg.train_subsample);
    std::sort(rows.begin(), rows.end());
  }
  const std::size_t n = rows.size();
  const std::size_t d = train.cols();

  SvmModel model;
  model.cols_ = d;
  model.kernel_ = {cfg.kernel, cfg.degree,
                   cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(d), cfg.coef0};
  model.mean_.assign(d, 0.0);
  model.scale_.assign(d, 1.0);
  model.y_.resize(n);
  std::vector<int> y01(n);
  for (std::size_t i = 0; i < n; ++i) {
    y01[i] = train.labels()[rows[i]] ? 1 : 0;
    model.y_[i] = y01[i] ? 1 : -1;
  }
  require_both_classes(y01);

  if (cfg.standardize) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (auto r : rows) s += train.at(r, j);
      const double mu = s / static_cast<double>(n);
      double v = 0.0;
      for (auto r : rows) v += (train.at(r, j) - mu) * (train.at(r, j) - mu);
      const double sd = std::sqrt(v / static_cast<double>(n));
      model.mean_[j] = mu;
      model.scale_[j] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
  }
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = model.transform(train.row(rows[i]));
    std::copy(t.begin(), t.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d));
  }

  // Dual: min f(a) = 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0.
  // Working pair = maximal violating pair; grad holds Qa - e.
  const double c = cfg.c;
  const auto& y = model.y_;
  KernelCache cache(x, n, d, model.kernel_, cfg.cache_mb);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  double dual = 0.0;
  if (cfg.record_objective) model.trace_.push_back(dual);

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  const std::size_t max_iter = std::max<std::size_t>(cfg.max_passes, 1) * std::max<std::size_t>(n, 1);
  std::size_t iter = 0;
  bool converged = false;
  double m_up = 0.0;
  double m_low = 0.0;
  for (;;) {
    std::size_t i = n;
    std::size_t j = n;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i == n || j == n || m_up - m_low <= cfg.tol) {
      converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    const std::vector<double>& ki = cache.get(i);
    const std::vector<double>& kj = cache.get(j);
    const double qii = cache.diag(i);
    const double qjj = cache.diag(j);
    const double qij = y[i] * y[j] * ki[j];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    double ai = old_i;
    double aj = old_j;
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c) {
          ai = c;
          aj = c - diff;
        }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) {
          ai = c;
          aj = sum - c;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c) {
        if (aj > c) {
          aj = c;
          ai = sum - c;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    if (cfg.record_objective) {
      const double df = grad[i] * di + grad[j] * dj +
                        0.5 * (qii * di * di + qjj * dj * dj) + qij * di * dj;
      dual -= df;
      model.trace_.push_back(dual);
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double yi_di = y[i] * di;
    const double yj_dj = y[j] * dj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (ki[t] * yi_di + kj[t] * yj_dj);
  }

  // Bias: mean of -y G over free vectors, else midpoint of the violation bounds.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.b_ = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(m_up) && std::isfinite(m_low)) {
    model.b_ = 0.5 * (m_up + m_low);
  } else {
    model.b_ = std::isfinite(m_up) ? m_up : (std::isfinite(m_low) ? m_low : 0.0);
  }

  model.train_f_.resize(n);
  for (std::size_t t = 0; t < n; ++t) model.train_f_[t] = y[t] * (grad[t] + 1.0) + model.b_;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.coef_.push_back(alpha[t] * y[t]);
      model.sv_.insert(model.sv_.end(), x.begin() + static_cast<std::ptrdiff_t>(t * d),
                       x.begin() + static_cast<std::ptrdiff_t>((t + 1) * d));
    }
  }
  model.alpha_ = std::move(alpha);
  model.converged_ = converged;
  model.iterations_ = iter;
  return model;
}

std::vector<double> SvmModel::transform(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean_[j]) * scale_[j];
  return out;
}

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != cols_) throw Error(Errc::DimMismatch, "input dimension differs from training");
  const auto t = transform(x);
  double f = b_;
  for (std::size_t s = 0; s < coef_.size(); ++s) {
    f += coef_[s] * kernel_raw(kernel_, sv_.data() + s * cols_, t.data(), cols_);
  }
  return f;
}

std::vector<double> SvmModel::decision_scores(const FeatureMatrix& x) const {
  if (x.cols() != cols_) throw Error(Errc::ColumnMismatch, "feature count differs from training");
  std::vector<double> out(x.rows());
  parallel_for(x.rows(), [&](std::size_t i) { out[i] = decision(x.row(i)); });
  return out;
}

std::vector<int> SvmModel::predict_labels(const FeatureMatrix& x) const {
  const auto f = decision_scores(x);
  std::vector<int> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0.0 ? 1 : 0;
  return out;
}

Prediction SvmModel::predict(const FeatureMatrix& x) const {
  Prediction out;
  out.scores = decision_scores(x);
  out.labels.resize(out.scores.size());
  out.proba = ProbaMatrix(out.scores.size());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    out.labels[i] = out.scores[i] > 0.0 ? 1 : 0;
    out.proba.set_positive(i, out.labels[i]);
  }
  return out;
}

ProbaMatrix SvmModel::predict_proba(const FeatureMatrix& x) const {
  const auto labels = predict_labels(x);
  ProbaMatrix out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.set_positive(i, labels[i]);
  return out;
}

}  // namespace soz
