#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "soz/dataset.hpp"

namespace soz {

/// One patient-level train/test partition (patient ids sorted).
struct SplitEntry {
  std::vector<std::string> train_patients;
  std::vector<std::string> test_patients;

  bool operator==(const SplitEntry&) const = default;
};

struct SplitPlan {
  std::vector<SplitEntry> splits;
  std::uint64_t seed = 0;

  bool operator==(const SplitPlan&) const = default;
};

/// Training-side size for a cohort of n patients: ceil(4n/7), i.e. 4 of 7.
std::size_t train_patient_count(std::size_t n_patients);

/// Number of k-subsets of an n-set, saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Samples `n_splits` distinct partitions uniformly without replacement.
SplitPlan make_splits(const std::set<std::string>& patients, std::size_t n_splits = 7,
                      std::uint64_t seed = 0);

class TrainFold;
class TestFold;
struct FoldPair;

FoldPair partition(const FeatureMatrix& matrix, const SplitEntry& split);

/// Training side of a split. Only `partition` and resampling create these, so
/// oversampling an unsplit matrix does not type-check.
class TrainFold {
 public:
  const FeatureMatrix& matrix() const noexcept { return m_; }

 private:
  explicit TrainFold(FeatureMatrix m) : m_(std::move(m)) {}
  friend FoldPair partition(const FeatureMatrix&, const SplitEntry&);
  friend class TrainFoldAccess;

  FeatureMatrix m_;
};

class TestFold {
 public:
  const FeatureMatrix& matrix() const noexcept { return m_; }

 private:
  explicit TestFold(FeatureMatrix m) : m_(std::move(m)) {}
  friend FoldPair partition(const FeatureMatrix&, const SplitEntry&);

  FeatureMatrix m_;
};

struct FoldPair {
  TrainFold train;
  TestFold test;
};

/// Routes cohort records by patient; encoder fitting happens on `train`.
struct CohortPair {
  Cohort train;
  Cohort test;
};
CohortPair partition_cohort(const Cohort& cohort, const SplitEntry& split);

/// Throws Error(PatientLeakage) if any patient key appears on both sides.
void check_patient_disjoint(const FeatureMatrix& train, const FeatureMatrix& test);

std::string splits_to_json(const SplitPlan& plan);
SplitPlan splits_from_json(const std::string& text);
void write_splits_json(const SplitPlan& plan, const std::filesystem::path& path);

}  // namespace soz
