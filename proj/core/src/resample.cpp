#include "soz/resample.hpp"

#include <algorithm>
#include <random>

#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/rng.hpp"

namespace soz {

class TrainFoldAccess {
 public:
  static TrainFold make(FeatureMatrix m) { return TrainFold(std::move(m)); }
};

std::vector<std::size_t> nearest_neighbors(const FeatureMatrix& m,
                                           const std::vector<std::size_t>& rows, std::size_t i,
                                           std::size_t k) {
  const auto xi = m.row(rows[i]);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j == i) continue;
    const auto xj = m.row(rows[j]);
    double d = 0.0;
    for (std::size_t c = 0; c < xi.size(); ++c) {
      const double diff = xi[c] - xj[c];
      d += diff * diff;
    }
    dist.emplace_back(d, j);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t a = 0; a < k; ++a) out[a] = dist[a].second;
  return out;
}

TrainFold smote(const TrainFold& fold, const SmoteConfig& cfg) {
  const FeatureMatrix& m = fold.matrix();
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < m.rows(); ++i) (m.labels()[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw Error(Errc::SingleClass, "SMOTE needs both classes");
  if (cfg.k_neighbors < 1) throw Error(Errc::InvalidConfig, "smote k must be >= 1");

  const bool pos_minority = pos.size() < neg.size();
  const auto& minority = pos_minority ? pos : neg;
  const std::size_t n_syn = (pos_minority ? neg.size() : pos.size()) - minority.size();
  if (n_syn == 0) return fold;
  if (minority.size() <= cfg.k_neighbors) {
    throw Error(Errc::MinorityTooSmall, "minority class has " + std::to_string(minority.size()) +
                                            " rows, need more than k=" +
                                            std::to_string(cfg.k_neighbors));
  }
  const int minority_label = pos_minority ? 1 : 0;

  std::vector<std::vector<std::size_t>> neighbors(minority.size());
  parallel_for(minority.size(), [&](std::size_t i) {
    neighbors[i] = nearest_neighbors(m, minority, i, cfg.k_neighbors);
  });

  const std::size_t d = m.cols();
  std::vector<double> values(m.values().begin(), m.values().end());
  values.reserve((m.rows() + n_syn) * d);
  std::vector<int> labels = m.labels();
  std::vector<std::string> keys = m.patient_keys();
  std::vector<RowOrigin> origins = m.origins();

  Rng rng = make_rng(cfg.seed, {0x5307eULL});
  std::uniform_real_distribution<double> lambda_dist(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> nn_dist(0, cfg.k_neighbors - 1);
  for (std::size_t s = 0; s < n_syn; ++s) {
    const std::size_t base = s % minority.size();
    const std::size_t nn = neighbors[base][nn_dist(rng)];
    const double lambda = lambda_dist(rng);
    const auto x = m.row(minority[base]);
    const auto y = m.row(minority[nn]);
    for (std::size_t c = 0; c < d; ++c) values.push_back(x[c] + lambda * (y[c] - x[c]));
    labels.push_back(minority_label);
    keys.push_back(m.patient_keys()[minority[base]]);
    origins.push_back({m.origins()[minority[base]].source_row, true});
  }
  return TrainFoldAccess::make(FeatureMatrix(m.column_names(), std::move(values), std::move(labels),
                                             std::move(keys), std::move(origins)));
}

}  // namespace soz
