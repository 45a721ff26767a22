#include <algorithm>
#include <cmath>
#include <iterator>
#include <memory>
#include <numeric>

#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/tree.hpp"

namespace soz {

namespace {

// Gains at or below this are treated as rounding noise.
constexpr double kMinGain = 1e-12;

double midpoint_cut(double lo, double hi) {
  const double mid = lo + 0.5 * (hi - lo);
  return mid > lo ? mid : hi;
}

double ratio_sq(double g, double h, double lambda) {
  const double den = h + lambda;
  return den > 0.0 ? g * g / den : 0.0;
}

}  // namespace

double leaf_weight(double g_sum, double h_sum, double lambda) noexcept {
  const double den = h_sum + lambda;
  return den > 0.0 ? -g_sum / den : 0.0;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) noexcept {
  return 0.5 * (ratio_sq(gl, hl, lambda) + ratio_sq(gr, hr, lambda) -
                ratio_sq(gl + gr, hl + hr, lambda)) -
         gamma;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

std::vector<std::vector<std::pair<int, double>>> DecisionTree::splits_by_depth() const {
  std::vector<std::vector<std::pair<int, double>>> out;
  if (nodes_.empty()) return out;
  std::vector<int> level = {0};
  while (!level.empty()) {
    std::vector<int> next;
    std::vector<std::pair<int, double>> here;
    for (int i : level) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
      if (n.is_leaf()) continue;
      here.emplace_back(n.feature, n.threshold);
      next.push_back(n.left);
      next.push_back(n.right);
    }
    if (!here.empty()) out.push_back(std::move(here));
    level = std::move(next);
  }
  return out;
}

ColumnStore::ColumnStore(const FeatureMatrix& m, std::size_t exact_limit, std::size_t max_bins)
    : n_(m.rows()), d_(m.cols()), exact_(m.rows() <= exact_limit) {
  if (n_ == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (max_bins < 2) throw Error(Errc::InvalidConfig, "need at least 2 bins");
  raw_.resize(n_ * d_);
  bins_.resize(n_ * d_);
  cuts_.resize(d_);
  sorted_.resize(d_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = m.row(i);
    for (std::size_t f = 0; f < d_; ++f) raw_[f * n_ + i] = r[f];
  }
  constexpr std::size_t kMaxBinIndex = 65535;
  parallel_for(d_, [&](std::size_t f) {
    const double* col = raw_.data() + f * n_;
    std::vector<double> sorted(col, col + n_);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq;
    uniq.reserve(n_);
    std::unique_copy(sorted.begin(), sorted.end(), std::back_inserter(uniq));

    std::vector<double>& cuts = cuts_[f];
    const bool exact_feature = (exact_ || uniq.size() <= max_bins) && uniq.size() <= kMaxBinIndex;
    if (exact_feature) {
      cuts.reserve(uniq.size());
      for (std::size_t u = 1; u < uniq.size(); ++u) cuts.push_back(midpoint_cut(uniq[u - 1], uniq[u]));
    } else {
      for (std::size_t j = 1; j < max_bins; ++j) {
        const double v = sorted[j * n_ / max_bins];
        if (v > sorted.front() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
      }
    }
    std::uint16_t* b = bins_.data() + f * n_;
    for (std::size_t i = 0; i < n_; ++i) {
      b[i] = static_cast<std::uint16_t>(std::upper_bound(cuts.begin(), cuts.end(), col[i]) -
                                        cuts.begin());
    }
  });
  for (const auto& c : cuts_) max_bin_count_ = std::max(max_bin_count_, c.size() + 1);
}

const std::vector<std::uint32_t>& ColumnStore::sorted_rows(std::size_t f) const {
  std::call_once(sorted_once_, [this] {
    parallel_for(d_, [this](std::size_t g) {
      // Counting sort by bin; stable, so ties stay in row order.
      const std::uint16_t* b = bins(g);
      std::vector<std::uint32_t> start(bin_count(g) + 1, 0);
      for (std::size_t i = 0; i < n_; ++i) ++start[b[i] + 1u];
      std::partial_sum(start.begin(), start.end(), start.begin());
      std::vector<std::uint32_t>& out = sorted_[g];
      out.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) out[start[b[i]]++] = static_cast<std::uint32_t>(i);
    });
  });
  return sorted_[f];
}

// ---------------------------------------------------------------------------
// Classification trees

namespace {

struct ClassSplit {
  bool valid = false;
  double score = -1.0;  // sum over children of (w0^2 + w1^2) / W
  double threshold = 0.0;
};

double child_score(double a0, double a1) {
  const double w = a0 + a1;
  return w > 0.0 ? (a0 * a0 + a1 * a1) / w : 0.0;
}

class ClassTreeBuilder {
 public:
  ClassTreeBuilder(const ColumnStore& data, std::span<const int> labels,
                   std::span<const std::uint32_t> weights, const CartParams& params, Rng& rng)
      : data_(data), labels_(labels), weights_(weights), params_(params), rng_(rng),
        feat_(data.features()), h0_(data.max_bin_count()), h1_(data.max_bin_count()) {
    std::iota(feat_.begin(), feat_.end(), std::size_t{0});
  }

  DecisionTree build() {
    std::vector<std::uint32_t> root;
    for (std::size_t i = 0; i < data_.rows(); ++i) {
      if (weights_[i] > 0) root.push_back(static_cast<std::uint32_t>(i));
    }
    if (root.empty()) throw Error(Errc::EmptyInput, "all training weights are zero");

    std::vector<TreeNode> nodes(1);
    struct Task {
      int node;
      std::vector<std::uint32_t> rows;
      std::size_t depth;
    };
    std::vector<Task> stack;
    stack.push_back({0, std::move(root), 0});
    while (!stack.empty()) {
      Task task = std::move(stack.back());
      stack.pop_back();
      double w0 = 0.0;
      double w1 = 0.0;
      for (auto r : task.rows) (labels_[r] ? w1 : w0) += weights_[r];
      TreeNode& node = nodes[static_cast<std::size_t>(task.node)];
      node.value = w1 / (w0 + w1);
      if (w0 == 0.0 || w1 == 0.0 || task.depth >= params_.max_depth ||
          w0 + w1 < static_cast<double>(params_.min_samples_split)) {
        continue;
      }
      const auto [feature, split] = best_split(task.rows);
      if (!split.valid) continue;

      std::vector<std::uint32_t> left;
      std::vector<std::uint32_t> right;
      const double* col = data_.column(feature);
      for (auto r : task.rows) (col[r] < split.threshold ? left : right).push_back(r);

      const int l = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      TreeNode& parent = nodes[static_cast<std::size_t>(task.node)];
      parent.feature = static_cast<int>(feature);
      parent.threshold = split.threshold;
      parent.left = l;
      parent.right = l + 1;
      stack.push_back({l + 1, std::move(right), task.depth + 1});
      stack.push_back({l, std::move(left), task.depth + 1});
    }
    return DecisionTree(std::move(nodes));
  }

 private:
  std::pair<std::size_t, ClassSplit> best_split(const std::vector<std::uint32_t>& rows) {
    const std::size_t d = feat_.size();
    const std::size_t mtry = params_.mtry == 0 ? d : std::min(params_.mtry, d);
    std::size_t evaluated = 0;
    std::size_t best_f = 0;
    ClassSplit best;
    // Draw features without replacement until mtry of them vary in this node.
    for (std::size_t pos = 0; pos < d && evaluated < mtry; ++pos) {
      std::uniform_int_distribution<std::size_t> pick(pos, d - 1);
      std::swap(feat_[pos], feat_[pick(rng_)]);
      const std::size_t f = feat_[pos];
      const ClassSplit s = params_.random_thresholds ? random_split(f, rows) : exact_split(f, rows);
      if (!s.valid) continue;
      ++evaluated;
      if (!best.valid || s.score > best.score) {
        best = s;
        best_f = f;
      }
    }
    return {best_f, best};
  }

  ClassSplit exact_split(std::size_t f, const std::vector<std::uint32_t>& rows) {
    const std::uint16_t* b = data_.bins(f);
    const std::size_t nb = data_.bin_count(f);
    const auto& cuts = data_.cuts(f);
    ClassSplit best;
    double t0 = 0.0;
    double t1 = 0.0;
    if (rows.size() * 4 >= nb) {
      std::fill(h0_.begin(), h0_.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
      std::fill(h1_.begin(), h1_.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
      for (auto r : rows) (labels_[r] ? h1_ : h0_)[b[r]] += weights_[r];
      for (std::size_t k = 0; k < nb; ++k) {
        t0 += h0_[k];
        t1 += h1_[k];
      }
      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t k = 0; k + 1 < nb; ++k) {
        l0 += h0_[k];
        l1 += h1_[k];
        if (h0_[k] + h1_[k] == 0.0) continue;
        if (l0 + l1 == t0 + t1) break;
        consider(best, l0, l1, t0 - l0, t1 - l1, cuts[k]);
      }
    } else {
      keyed_.clear();
      for (auto r : rows) keyed_.emplace_back(b[r], r);
      std::sort(keyed_.begin(), keyed_.end());
      for (const auto& [k, r] : keyed_) (labels_[r] ? t1 : t0) += weights_[r];
      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t i = 0; i + 1 < keyed_.size(); ++i) {
        const auto [k, r] = keyed_[i];
        (labels_[r] ? l1 : l0) += weights_[r];
        if (keyed_[i + 1].first != k) consider(best, l0, l1, t0 - l0, t1 - l1, cuts[k]);
      }
    }
    return best;
  }

  ClassSplit random_split(std::size_t f, const std::vector<std::uint32_t>& rows) {
    const double* col = data_.column(f);
    double lo = col[rows.front()];
    double hi = lo;
    for (auto r : rows) {
      lo = std::min(lo, col[r]);
      hi = std::max(hi, col[r]);
    }
    ClassSplit s;
    if (!(hi > lo)) return s;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double t = lo + u(rng_) * (hi - lo);
    if (!(t > lo)) t = hi;
    double l0 = 0.0, l1 = 0.0, r0 = 0.0, r1 = 0.0;
    for (auto r : rows) {
      const double w = weights_[r];
      if (col[r] < t) {
        (labels_[r] ? l1 : l0) += w;
      } else {
        (labels_[r] ? r1 : r0) += w;
      }
    }
    consider(s, l0, l1, r0, r1, t);
    return s;
  }

  static void consider(ClassSplit& best, double l0, double l1, double r0, double r1, double thr) {
    if (l0 + l1 == 0.0 || r0 + r1 == 0.0) return;
    const double score = child_score(l0, l1) + child_score(r0, r1);
    if (!best.valid || score > best.score) {
      best.valid = true;
      best.score = score;
      best.threshold = thr;
    }
  }

  const ColumnStore& data_;
  std::span<const int> labels_;
  std::span<const std::uint32_t> weights_;
  const CartParams& params_;
  Rng& rng_;
  std::vector<std::size_t> feat_;
  std::vector<double> h0_;
  std::vector<double> h1_;
  std::vector<std::pair<std::uint16_t, std::uint32_t>> keyed_;
};

}  // namespace

DecisionTree grow_classification_tree(const ColumnStore& data, std::span<const int> labels,
                                      std::span<const std::uint32_t> weights,
                                      const CartParams& params, Rng& rng) {
  if (labels.size() != data.rows() || weights.size() != data.rows()) {
    throw Error(Errc::ShapeMismatch, "labels/weights do not match the training rows");
  }
  return ClassTreeBuilder(data, labels, weights, params, rng).build();
}

// ---------------------------------------------------------------------------
// Boosting trees

namespace {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct Candidate {
  double gain = kMinGain;
  int feature = -1;
  std::size_t cut = 0;
  bool found() const noexcept { return feature >= 0; }
};

class BoostTreeBuilder {
 public:
  BoostTreeBuilder(const ColumnStore& data, std::span<const double> g, std::span<const double> h,
                   const BoostTreeParams& p)
      : data_(data), g_(g), h_(h), p_(p) {}

  DecisionTree build() {
    const std::size_t n = data_.rows();
    nodes_.assign(1, TreeNode{});
    NodeStats root;
    for (std::size_t i = 0; i < n; ++i) {
      root.g += g_[i];
      root.h += h_[i];
    }
    root.count = n;
    active_.clear();
    active_.push_back(Active{0, root, 0, n, {}});
    idx_.resize(n);
    std::iota(idx_.begin(), idx_.end(), std::uint32_t{0});

    use_hist_ = data_.max_bin_count() <= ColumnStore::kMaxQuantileBins;
    if (use_hist_) {
      offsets_.resize(data_.features() + 1, 0);
      for (std::size_t f = 0; f < data_.features(); ++f) {
        offsets_[f + 1] = offsets_[f] + data_.bin_count(f);
      }
      if (p_.max_depth > 0) active_[0].hist = build_hist(0, n);
    } else {
      slot_.assign(n, 0);
    }

    for (std::size_t depth = 0; depth < p_.max_depth && !active_.empty(); ++depth) {
      std::vector<Candidate> choice(active_.size());
      if (p_.oblivious) {
        const Candidate shared = use_hist_ ? oblivious_hist() : oblivious_sorted();
        std::fill(choice.begin(), choice.end(), shared);
      } else {
        choice = use_hist_ ? regular_hist() : regular_sorted();
      }
      apply(choice, depth + 1 < p_.max_depth);
    }
    for (const Active& a : active_) make_leaf(a);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Active {
    int node;
    NodeStats stats;
    std::size_t begin;  // range in idx_ (histogram path)
    std::size_t end;
    std::vector<double> hist;  // (g, h, count) per bin, histogram path only
  };

  void make_leaf(const Active& a) {
    TreeNode& n = nodes_[static_cast<std::size_t>(a.node)];
    n.feature = -1;
    n.value = leaf_weight(a.stats.g, a.stats.h, p_.lambda);
  }

  std::vector<double> build_hist(std::size_t begin, std::size_t end) const {
    std::vector<double> hist(3 * offsets_.back(), 0.0);
    const std::size_t m = end - begin;
    std::vector<double> gg(m);
    std::vector<double> hh(m);
    for (std::size_t i = 0; i < m; ++i) {
      gg[i] = g_[idx_[begin + i]];
      hh[i] = h_[idx_[begin + i]];
    }
    parallel_for(data_.features(), [&](std::size_t f) {
      const std::uint16_t* b = data_.bins(f);
      double* hf = hist.data() + 3 * offsets_[f];
      for (std::size_t i = 0; i < m; ++i) {
        double* cell = hf + 3 * b[idx_[begin + i]];
        cell[0] += gg[i];
        cell[1] += hh[i];
        cell[2] += 1.0;
      }
    });
    return hist;
  }

  std::vector<Candidate> regular_hist() const {
    std::vector<Candidate> out(active_.size());
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const Active& act = active_[a];
      Candidate& best = out[a];
      for (std::size_t f = 0; f < data_.features(); ++f) {
        const double* hf = act.hist.data() + 3 * offsets_[f];
        double gl = 0.0, hl = 0.0, cl = 0.0;
        const double total = static_cast<double>(act.stats.count);
        for (std::size_t k = 0; k + 1 < data_.bin_count(f); ++k) {
          gl += hf[3 * k];
          hl += hf[3 * k + 1];
          cl += hf[3 * k + 2];
          if (cl == 0.0 || hf[3 * k + 2] == 0.0) continue;
          if (cl == total) break;
          const double gain = split_gain(gl, hl, act.stats.g - gl, act.stats.h - hl, p_.lambda, p_.gamma);
          if (gain > best.gain) best = {gain, static_cast<int>(f), k};
        }
      }
    }
    return out;
  }

  Candidate oblivious_hist() const {
    Candidate best;
    std::vector<double> total;
    for (std::size_t f = 0; f < data_.features(); ++f) {
      const std::size_t nb = data_.bin_count(f);
      total.assign(nb, 0.0);
      for (const Active& act : active_) {
        const double* hf = act.hist.data() + 3 * offsets_[f];
        double gl = 0.0, hl = 0.0;
        for (std::size_t k = 0; k + 1 < nb; ++k) {
          gl += hf[3 * k];
          hl += hf[3 * k + 1];
          total[k] += split_gain(gl, hl, act.stats.g - gl, act.stats.h - hl, p_.lambda, p_.gamma);
        }
      }
      for (std::size_t k = 0; k + 1 < nb; ++k) {
        if (total[k] > best.gain) best = {total[k], static_cast<int>(f), k};
      }
    }
    return best;
  }

  std::vector<Candidate> regular_sorted() const {
    const std::size_t na = active_.size();
    std::vector<Candidate> out(na);
    std::vector<NodeStats> acc(na);
    std::vector<int> last(na);
    for (std::size_t f = 0; f < data_.features(); ++f) {
      const std::uint16_t* b = data_.bins(f);
      std::fill(acc.begin(), acc.end(), NodeStats{});
      std::fill(last.begin(), last.end(), -1);
      for (std::uint32_t r : data_.sorted_rows(f)) {
        const int s = slot_[r];
        if (s < 0) continue;
        const auto v = static_cast<std::size_t>(s);
        const int bin = b[r];
        if (last[v] >= 0 && bin != last[v]) {
          const NodeStats& tot = active_[v].stats;
          const double gain = split_gain(acc[v].g, acc[v].h, tot.g - acc[v].g, tot.h - acc[v].h,
                                         p_.lambda, p_.gamma);
          if (gain > out[v].gain) out[v] = {gain, static_cast<int>(f), static_cast<std::size_t>(last[v])};
        }
        acc[v].g += g_[r];
        acc[v].h += h_[r];
        last[v] = bin;
      }
    }
    return out;
  }

  Candidate oblivious_sorted() const {
    const std::size_t na = active_.size();
    Candidate best;
    std::vector<NodeStats> acc(na);
    auto score = [&](std::size_t v) {
      const NodeStats& t = active_[v].stats;
      return ratio_sq(acc[v].g, acc[v].h, p_.lambda) +
             ratio_sq(t.g - acc[v].g, t.h - acc[v].h, p_.lambda);
    };
    double parent = 0.0;
    for (const Active& a : active_) parent += ratio_sq(a.stats.g, a.stats.h, p_.lambda);
    const double penalty = p_.gamma * static_cast<double>(na);
    for (std::size_t f = 0; f < data_.features(); ++f) {
      const std::uint16_t* b = data_.bins(f);
      std::fill(acc.begin(), acc.end(), NodeStats{});
      double sum = parent;
      int last = -1;
      for (std::uint32_t r : data_.sorted_rows(f)) {
        const int s = slot_[r];
        if (s < 0) continue;
        const auto v = static_cast<std::size_t>(s);
        const int bin = b[r];
        if (last >= 0 && bin != last) {
          const double gain = 0.5 * (sum - parent) - penalty;
          if (gain > best.gain) best = {gain, static_cast<int>(f), static_cast<std::size_t>(last)};
        }
        const double before = score(v);
        acc[v].g += g_[r];
        acc[v].h += h_[r];
        sum += score(v) - before;
        last = bin;
      }
    }
    return best;
  }

  void apply(const std::vector<Candidate>& choice, bool need_hist) {
    std::vector<Active> next;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      Active& act = active_[a];
      const Candidate& c = choice[a];
      if (!c.found()) {
        make_leaf(act);
        continue;
      }
      const auto f = static_cast<std::size_t>(c.feature);
      const std::uint16_t* b = data_.bins(f);
      const int l = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      TreeNode& node = nodes_[static_cast<std::size_t>(act.node)];
      node.feature = c.feature;
      node.threshold = data_.cuts(f)[c.cut];
      node.left = l;
      node.right = l + 1;

      Active left{l, {}, 0, 0, {}};
      Active right{l + 1, {}, 0, 0, {}};
      if (use_hist_) {
        // Stable partition of the node's index range.
        std::vector<std::uint32_t> lo;
        std::vector<std::uint32_t> hi;
        for (std::size_t i = act.begin; i < act.end; ++i) {
          const std::uint32_t r = idx_[i];
          (b[r] <= c.cut ? lo : hi).push_back(r);
        }
        std::copy(lo.begin(), lo.end(), idx_.begin() + static_cast<std::ptrdiff_t>(act.begin));
        std::copy(hi.begin(), hi.end(), idx_.begin() + static_cast<std::ptrdiff_t>(act.begin + lo.size()));
        left.begin = act.begin;
        left.end = act.begin + lo.size();
        right.begin = left.end;
        right.end = act.end;
        for (auto r : lo) accumulate(left.stats, r);
        for (auto r : hi) accumulate(right.stats, r);
        if (need_hist) {
          Active& small = lo.size() <= hi.size() ? left : right;
          Active& large = lo.size() <= hi.size() ? right : left;
          small.hist = build_hist(small.begin, small.end);
          large.hist = std::move(act.hist);
          for (std::size_t k = 0; k < large.hist.size(); ++k) large.hist[k] -= small.hist[k];
        }
      } else {
        left.begin = a;  // reuse as parent slot marker
        right.begin = a;
      }
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }

    if (!use_hist_) {
      // Re-slot rows: rows of split nodes move to their child, others retire.
      std::vector<int> child_base(active_.size(), -1);
      for (std::size_t k = 0; k < next.size(); k += 2) child_base[next[k].begin] = static_cast<int>(k);
      for (auto& a : next) a.stats = {};
      for (std::size_t r = 0; r < slot_.size(); ++r) {
        const int s = slot_[r];
        if (s < 0) continue;
        const int base = child_base[static_cast<std::size_t>(s)];
        if (base < 0) {
          slot_[r] = -1;
          continue;
        }
        const Candidate& c = choice[static_cast<std::size_t>(s)];
        const bool go_left = data_.bins(static_cast<std::size_t>(c.feature))[r] <= c.cut;
        const int ns = base + (go_left ? 0 : 1);
        slot_[r] = ns;
        accumulate(next[static_cast<std::size_t>(ns)].stats, r);
      }
    }
    active_ = std::move(next);
  }

  void accumulate(NodeStats& s, std::uint32_t r) const {
    s.g += g_[r];
    s.h += h_[r];
    ++s.count;
  }

  const ColumnStore& data_;
  std::span<const double> g_;
  std::span<const double> h_;
  const BoostTreeParams& p_;
  std::vector<TreeNode> nodes_;
  std::vector<Active> active_;
  bool use_hist_ = false;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> idx_;
  std::vector<int> slot_;
};

}  // namespace

DecisionTree grow_boosting_tree(const ColumnStore& data, std::span<const double> grad,
                                std::span<const double> hess, const BoostTreeParams& params) {
  if (grad.size() != data.rows() || hess.size() != data.rows()) {
    throw Error(Errc::ShapeMismatch, "gradient/hessian length does not match the training rows");
  }
  if (!(params.lambda >= 0.0)) throw Error(Errc::InvalidConfig, "lambda must be >= 0");
  return BoostTreeBuilder(data, grad, hess, params).build();
}

}  // namespace soz
