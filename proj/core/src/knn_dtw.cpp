#include "soz/knn_dtw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/rng.hpp"

namespace soz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double dtw_bounded(std::span<const double> a, std::span<const double> b,
                   std::size_t band_radius, double cutoff) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) throw Error(Errc::LengthMismatch, "dtw on an empty series");
  const std::size_t gap = n > m ? n - m : m - n;
  if (band_radius < gap) {
    throw Error(Errc::BandTooNarrow, "band radius " + std::to_string(band_radius) +
                                         " cannot reach the final cell (length gap " +
                                         std::to_string(gap) + ")");
  }

  std::vector<double> prev(m, kInf);
  std::vector<double> cur(m, kInf);
  std::size_t prev_lo = 0;
  std::size_t prev_hi = 0;  // exclusive
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = band_radius >= i ? 0 : i - band_radius;
    const std::size_t hi = band_radius >= m ? m : std::min(m, i + band_radius + 1);
    double row_min = kInf;
    double left = kInf;
    for (std::size_t j = lo; j < hi; ++j) {
      const double diff = a[i] - b[j];
      const double cost = diff * diff;
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        const double up = (i > 0 && j >= prev_lo && j < prev_hi) ? prev[j] : kInf;
        const double diag = (i > 0 && j > 0 && j - 1 >= prev_lo && j - 1 < prev_hi) ? prev[j - 1] : kInf;
        best = std::min({up, diag, left});
      }
      const double v = cost + best;
      cur[j] = v;
      left = v;
      row_min = std::min(row_min, v);
    }
    if (row_min > cutoff) return kInf;
    std::swap(prev, cur);
    prev_lo = lo;
    prev_hi = hi;
  }
  return prev[m - 1];
}

double dtw(std::span<const double> a, std::span<const double> b, std::size_t band_radius) {
  return dtw_bounded(a, b, band_radius, kInf);
}

KnnDtwModel knn_fit(const FeatureMatrix& train, const DtwConfig& cfg) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "knn_fit on an empty matrix");
  if (cfg.k == 0) throw Error(Errc::InvalidConfig, "k must be >= 1");
  if (!(cfg.meta_weight >= 0.0)) throw Error(Errc::InvalidConfig, "meta_weight must be >= 0");

  std::vector<std::size_t> keep(train.rows());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (cfg.train_subsample > 0 && train.rows() > cfg.train_subsample) {
    Rng rng = make_rng(cfg.seed, {0x6e6eULL});
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(cfg.train_subsample);
    std::sort(keep.begin(), keep.end());
  }
  if (cfg.k > keep.size()) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(cfg.k) + " exceeds " +
                                     std::to_string(keep.size()) + " stored rows");
  }

  KnnDtwModel model;
  model.cfg_ = cfg;
  model.columns_ = train.column_names();
  model.cols_ = train.cols();
  model.series_cols_ = train.series_columns();
  model.rows_.reserve(keep.size() * train.cols());
  model.labels_.reserve(keep.size());
  for (std::size_t i : keep) {
    const auto r = train.row(i);
    model.rows_.insert(model.rows_.end(), r.begin(), r.end());
    model.labels_.push_back(train.labels()[i]);
  }
  return model;
}

double KnnDtwModel::distance(std::span<const double> a, std::span<const double> b) const {
  double meta = 0.0;
  for (std::size_t c = series_cols_; c < cols_; ++c) {
    const double d = a[c] - b[c];
    meta += d * d;
  }
  double series = 0.0;
  if (series_cols_ > 0) {
    series = dtw(a.first(series_cols_), b.first(series_cols_), cfg_.band_radius);
  }
  return series + cfg_.meta_weight * meta;
}

std::vector<std::size_t> KnnDtwModel::neighbors(std::span<const double> x) const {
  const std::size_t k = cfg_.k;
  // (distance, stored index), kept sorted ascending; rows are visited in
  // index order so equal distances never displace an earlier row.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k + 1);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::span<const double> r(rows_.data() + i * cols_, cols_);
    double meta = 0.0;
    for (std::size_t c = series_cols_; c < cols_; ++c) {
      const double d = x[c] - r[c];
      meta += d * d;
    }
    meta *= cfg_.meta_weight;
    const bool full = best.size() == k;
    const double bound = full ? best.back().first : kInf;
    if (full && meta > bound) continue;
    double d = meta;
    if (series_cols_ > 0) {
      d += dtw_bounded(x.first(series_cols_), r.first(series_cols_), cfg_.band_radius,
                       full ? bound - meta : kInf);
    }
    if (full && !(d < bound)) continue;
    const auto pos = std::upper_bound(best.begin(), best.end(), d,
                                      [](double v, const auto& e) { return v < e.first; });
    best.insert(pos, {d, i});
    if (best.size() > k) best.pop_back();
  }
  std::vector<std::size_t> out(best.size());
  for (std::size_t a = 0; a < best.size(); ++a) out[a] = best[a].second;
  return out;
}

ProbaMatrix KnnDtwModel::predict_proba(const FeatureMatrix& x) const {
  if (x.column_names() != columns_) {
    throw Error(Errc::ColumnMismatch, "test columns differ from training columns");
  }
  ProbaMatrix out(x.rows());
  parallel_for(x.rows(), [&](std::size_t i) {
    const auto nn = neighbors(x.row(i));
    std::size_t positives = 0;
    for (std::size_t j : nn) positives += static_cast<std::size_t>(labels_[j]);
    const double k = static_cast<double>(nn.size());
    out(i, 1) = static_cast<double>(positives) / k;
    out(i, 0) = static_cast<double>(nn.size() - positives) / k;
  });
  return out;
}

}  // namespace soz
