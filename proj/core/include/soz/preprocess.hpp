#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soz/dataset.hpp"

namespace soz {

inline constexpr double kDefaultSmoothing = 20.0;
inline constexpr double kDefaultFlatEps = 1e-6;  // µV²
inline constexpr std::size_t kSaturationRun = 5;

/// Drops the first 5 samples of every series: raw -> cleaned.
Cohort trim_artifact(const Cohort& cohort);

enum class RejectReason { saturation, flatline };
std::string_view to_string(RejectReason r) noexcept;

struct Rejection {
  std::size_t row_index;
  RejectReason reason;
  bool operator==(const Rejection&) const = default;
};

struct RejectionResult {
  Cohort kept;
  std::vector<Rejection> rejected;
};

/// Removes trials with a run of >= 5 samples at |x| >= sat_threshold, or
/// with series variance below flat_eps. Survivors keep their order.
RejectionResult reject_artifacts(const Cohort& cohort, double sat_threshold, double flat_eps);

/// 4 x the 95th percentile of |sample| over the whole cohort.
double default_saturation_threshold(const Cohort& cohort);

void write_rejections_csv(std::span<const Rejection> rejected, const std::filesystem::path& path);

/// Smoothed mean-target encoder for the six categorical metadata columns:
///   enc(c) = (s(c) + m p) / (n(c) + m)
/// with p the training positive rate. Unseen categories map to p.
class TargetEncoder {
 public:
  enum class Column : std::size_t {
    stim_electrode_id,
    rec_electrode_id,
    stim_region,
    rec_region,
    tissue_type,
    hemisphere,
  };
  static constexpr std::size_t kColumns = 6;

  TargetEncoder() = default;

  double global_prior() const noexcept { return prior_; }
  double smoothing() const noexcept { return m_; }
  const std::string& fitted_on() const noexcept { return fitted_on_; }
  const std::map<std::string, double>& table(Column c) const {
    return tables_[static_cast<std::size_t>(c)];
  }

  double encode(Column c, std::string_view category) const;

 private:
  friend TargetEncoder fit_encoder(const Cohort&, double, std::string);

  std::array<std::map<std::string, double>, kColumns> tables_;
  double prior_ = 0.0;
  double m_ = kDefaultSmoothing;
  std::string fitted_on_;
};

TargetEncoder fit_encoder(const Cohort& train, double m, std::string fitted_on = {});

/// cleaned -> encoded. Reads only the encoder, never the cohort's labels.
Cohort apply_encoder(const TargetEncoder& enc, const Cohort& cohort);

}  // namespace soz
