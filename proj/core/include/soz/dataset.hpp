#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace soz {

// One sample per millisecond. Raw recordings carry the 5-sample stimulation
// artifact; everything downstream of trimming sees 495 samples.
inline constexpr std::size_t kRawLength = 500;
inline constexpr std::size_t kArtifactSamples = 5;
inline constexpr std::size_t kTrimmedLength = kRawLength - kArtifactSamples;
inline constexpr std::size_t kMetadataColumns = 7;
inline constexpr std::size_t kFullDesignColumns = kTrimmedLength + kMetadataColumns;

enum class TissueType { gray, white };
enum class Hemisphere { left, right };
enum class Stage { raw, cleaned, encoded };

std::string_view to_string(TissueType t) noexcept;
std::string_view to_string(Hemisphere h) noexcept;
std::string_view to_string(Stage s) noexcept;

/// Series length required at a stage (500 raw, 495 afterwards).
std::size_t series_length(Stage stage) noexcept;

/// Categorical metadata as recorded. Tissue type and hemisphere describe the
/// recording electrode.
struct CategoricalMeta {
  std::string stim_electrode_id;
  std::string rec_electrode_id;
  std::string stim_region;
  std::string rec_region;
  TissueType tissue_type = TissueType::gray;
  Hemisphere hemisphere = Hemisphere::left;

  bool operator==(const CategoricalMeta&) const = default;
};

/// The same six fields after target encoding.
struct EncodedMeta {
  double stim_electrode_id = 0.0;
  double rec_electrode_id = 0.0;
  double stim_region = 0.0;
  double rec_region = 0.0;
  double tissue_type = 0.0;
  double hemisphere = 0.0;

  bool operator==(const EncodedMeta&) const = default;
};

/// One stimulation-response trial.
struct CcepRecord {
  std::string patient_id;
  double stim_amplitude = 0.0;  // mA
  std::variant<CategoricalMeta, EncodedMeta> meta;
  std::vector<float> series;  // µV
  int soz = 0;

  bool is_encoded() const noexcept { return std::holds_alternative<EncodedMeta>(meta); }
  const CategoricalMeta& categorical() const;
  const EncodedMeta& encoded() const;

  bool operator==(const CcepRecord&) const = default;
};

/// Immutable collection of records at a single pipeline stage. The
/// constructor enforces the record invariants for that stage.
class Cohort {
 public:
  Cohort() = default;
  Cohort(Stage stage, std::vector<CcepRecord> records);

  Stage stage() const noexcept { return stage_; }
  const std::vector<CcepRecord>& records() const noexcept { return records_; }
  const std::set<std::string>& patients() const noexcept { return patients_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  bool operator==(const Cohort& other) const {
    return stage_ == other.stage_ && records_ == other.records_;
  }

 private:
  Stage stage_ = Stage::raw;
  std::vector<CcepRecord> records_;
  std::set<std::string> patients_;
};

/// Where a design-matrix row came from: the cohort row it was built from, or
/// for SMOTE output the cohort row of its base sample.
struct RowOrigin {
  std::int64_t source_row = -1;
  bool synthetic = false;

  bool operator==(const RowOrigin&) const = default;
};

/// Dense row-major design matrix with aligned labels and patient keys.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> column_names, std::vector<double> values,
                std::vector<int> labels, std::vector<std::string> patient_keys,
                std::vector<RowOrigin> origins = {});

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return column_names_.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols(), cols()};
  }
  double at(std::size_t i, std::size_t j) const noexcept { return values_[i * cols() + j]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& patient_keys() const noexcept { return patient_keys_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  const std::vector<RowOrigin>& origins() const noexcept { return origins_; }

  /// Number of leading time-series columns (named t000, t001, ...).
  std::size_t series_columns() const noexcept { return series_columns_; }

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix leading_columns(std::size_t count) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> column_names_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::string> patient_keys_;
  std::vector<RowOrigin> origins_;
  std::size_t series_columns_ = 0;
};

/// Column name for series sample i ("t000" ... "t499").
std::string series_column_name(std::size_t i);

/// Exact CSV header for a stage.
std::vector<std::string> csv_header(Stage stage);

/// Names of the design-matrix columns: series columns, then the seven
/// metadata columns when requested.
std::vector<std::string> design_columns(bool include_metadata);

Cohort read_csv(std::istream& in, Stage stage);
Cohort load_csv(const std::filesystem::path& path, Stage stage);
void write_csv(const Cohort& cohort, std::ostream& out);
void write_csv(const Cohort& cohort, const std::filesystem::path& path);

FeatureMatrix to_matrix(const Cohort& cohort, bool include_metadata);

/// Shortest decimal text that parses back to the same value.
std::string format_shortest(double v);
std::string format_shortest(float v);

}  // namespace soz
