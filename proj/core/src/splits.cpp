#include "soz/splits.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "soz/error.hpp"
#include "soz/rng.hpp"

namespace soz {

namespace {

constexpr std::uint64_t kEnumerationLimit = 200'000;

enum class Side { train, test };

std::map<std::string, Side> side_map(const SplitEntry& split) {
  std::map<std::string, Side> sides;
  for (const auto& p : split.train_patients) sides[p] = Side::train;
  for (const auto& p : split.test_patients) {
    if (sides.contains(p)) {
      throw Error(Errc::PatientLeakage, "patient " + p + " listed on both sides of a split");
    }
    sides[p] = Side::test;
  }
  return sides;
}

SplitEntry entry_from_mask(const std::vector<std::string>& ids, const std::vector<char>& in_train) {
  SplitEntry e;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    (in_train[i] ? e.train_patients : e.test_patients).push_back(ids[i]);
  }
  return e;
}

}  // namespace

std::size_t train_patient_count(std::size_t n_patients) { return (4 * n_patients + 6) / 7; }

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r = r * num / i;
  }
  return r;
}

SplitPlan make_splits(const std::set<std::string>& patients, std::size_t n_splits,
                      std::uint64_t seed) {
  const std::size_t n = patients.size();
  if (n < 4) {
    throw Error(Errc::TooFewPatients,
                "need at least 4 patients for a grouped split, got " + std::to_string(n));
  }
  if (n_splits == 0) throw Error(Errc::InvalidConfig, "n_splits must be >= 1");
  const std::size_t t = train_patient_count(n);
  const std::uint64_t total = binomial(n, t);
  if (n_splits > total) {
    throw Error(Errc::TooManySplitsRequested, "requested " + std::to_string(n_splits) +
                                                  " splits but only " + std::to_string(total) +
                                                  " distinct partitions exist");
  }

  const std::vector<std::string> ids(patients.begin(), patients.end());
  Rng rng = make_rng(seed, {0x5711ULL});
  SplitPlan plan;
  plan.seed = seed;

  if (total <= kEnumerationLimit) {
    // All t-subsets in lexicographic order, then a partial Fisher-Yates draw.
    std::vector<std::vector<char>> masks;
    masks.reserve(static_cast<std::size_t>(total));
    std::vector<char> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(t), true);
    do {
      masks.push_back(mask);
    } while (std::prev_permutation(mask.begin(), mask.end()));
    for (std::size_t i = 0; i < n_splits; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, masks.size() - 1);
      std::swap(masks[i], masks[pick(rng)]);
      plan.splits.push_back(entry_from_mask(ids, masks[i]));
    }
  } else {
    std::set<std::vector<char>> seen;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    while (plan.splits.size() < n_splits) {
      std::shuffle(idx.begin(), idx.end(), rng);
      std::vector<char> mask(n, false);
      for (std::size_t i = 0; i < t; ++i) mask[idx[i]] = true;
      if (seen.insert(mask).second) plan.splits.push_back(entry_from_mask(ids, mask));
    }
  }
  return plan;
}

FoldPair partition(const FeatureMatrix& matrix, const SplitEntry& split) {
  const auto sides = side_map(split);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto it = sides.find(matrix.patient_keys()[i]);
    if (it == sides.end()) {
      throw Error(Errc::UnassignedPatient,
                  "row " + std::to_string(i) + ": patient " + matrix.patient_keys()[i] +
                      " is in neither side of the split");
    }
    (it->second == Side::train ? train_idx : test_idx).push_back(i);
  }
  return FoldPair{TrainFold(matrix.select_rows(train_idx)), TestFold(matrix.select_rows(test_idx))};
}

CohortPair partition_cohort(const Cohort& cohort, const SplitEntry& split) {
  const auto sides = side_map(split);
  std::vector<CcepRecord> train;
  std::vector<CcepRecord> test;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto& rec = cohort.records()[i];
    const auto it = sides.find(rec.patient_id);
    if (it == sides.end()) {
      throw Error(Errc::UnassignedPatient, "row " + std::to_string(i) + ": patient " +
                                               rec.patient_id + " is in neither side of the split");
    }
    (it->second == Side::train ? train : test).push_back(rec);
  }
  return CohortPair{Cohort(cohort.stage(), std::move(train)), Cohort(cohort.stage(), std::move(test))};
}

void check_patient_disjoint(const FeatureMatrix& train, const FeatureMatrix& test) {
  const std::set<std::string> train_keys(train.patient_keys().begin(), train.patient_keys().end());
  for (const auto& k : test.patient_keys()) {
    if (train_keys.contains(k)) {
      throw Error(Errc::PatientLeakage, "patient " + k + " appears in both train and test");
    }
  }
}

std::string splits_to_json(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["splits"] = nlohmann::ordered_json::array();
  for (const auto& s : plan.splits) {
    nlohmann::ordered_json e;
    e["train"] = s.train_patients;
    e["test"] = s.test_patients;
    j["splits"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

SplitPlan splits_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SplitPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("splits")) {
      plan.splits.push_back({e.at("train").get<std::vector<std::string>>(),
                             e.at("test").get<std::vector<std::string>>()});
    }
    return plan;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::ParseError, std::string("splits.json: ") + ex.what());
  }
}

void write_splits_json(const SplitPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string());
  out << splits_to_json(plan);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace soz
