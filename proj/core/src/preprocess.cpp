#include "soz/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "soz/error.hpp"
#include "soz/parallel.hpp"

namespace soz {

namespace {

std::array<std::string, TargetEncoder::kColumns> category_keys(const CategoricalMeta& m) {
  return {m.stim_electrode_id, m.rec_electrode_id, m.stim_region, m.rec_region,
          std::string(to_string(m.tissue_type)), std::string(to_string(m.hemisphere))};
}

}  // namespace

std::string_view to_string(RejectReason r) noexcept {
  return r == RejectReason::saturation ? "saturation" : "flatline";
}

Cohort trim_artifact(const Cohort& cohort) {
  if (cohort.stage() != Stage::raw) {
    throw Error(Errc::WrongStage, "trim_artifact needs a raw cohort, got " +
                                      std::string(to_string(cohort.stage())));
  }
  std::vector<CcepRecord> records = cohort.records();
  for (auto& rec : records) {
    rec.series.erase(rec.series.begin(), rec.series.begin() + kArtifactSamples);
  }
  return Cohort(Stage::cleaned, std::move(records));
}

RejectionResult reject_artifacts(const Cohort& cohort, double sat_threshold, double flat_eps) {
  if (cohort.stage() != Stage::cleaned) {
    throw Error(Errc::WrongStage, "reject_artifacts needs a cleaned cohort");
  }
  const auto& recs = cohort.records();
  std::vector<int> verdict(recs.size(), -1);
  parallel_for(recs.size(), [&](std::size_t i) {
    const auto& s = recs[i].series;
    std::size_t run = 0;
    for (float v : s) {
      run = std::fabs(static_cast<double>(v)) >= sat_threshold ? run + 1 : 0;
      if (run >= kSaturationRun) {
        verdict[i] = static_cast<int>(RejectReason::saturation);
        return;
      }
    }
    double mean = 0.0;
    for (float v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (float v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size());
    if (var < flat_eps) verdict[i] = static_cast<int>(RejectReason::flatline);
  });

  RejectionResult result;
  std::vector<CcepRecord> kept;
  kept.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (verdict[i] < 0) {
      kept.push_back(recs[i]);
    } else {
      result.rejected.push_back({i, static_cast<RejectReason>(verdict[i])});
    }
  }
  result.kept = Cohort(cohort.stage(), std::move(kept));
  return result;
}

double default_saturation_threshold(const Cohort& cohort) {
  std::vector<float> mags;
  std::size_t total = 0;
  for (const auto& r : cohort.records()) total += r.series.size();
  if (total == 0) return std::numeric_limits<double>::infinity();
  mags.reserve(total);
  for (const auto& r : cohort.records()) {
    for (float v : r.series) mags.push_back(std::fabs(v));
  }
  // Linear interpolation between closest ranks.
  const double pos = 0.95 * static_cast<double>(mags.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(lo), mags.end());
  const double a = mags[lo];
  double b = a;
  if (lo + 1 < mags.size()) {
    b = *std::min_element(mags.begin() + static_cast<std::ptrdiff_t>(lo + 1), mags.end());
  }
  const double p95 = a + (pos - static_cast<double>(lo)) * (b - a);
  return 4.0 * p95;
}

void write_rejections_csv(std::span<const Rejection> rejected, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string());
  out << "row_index,reason\n";
  for (const auto& r : rejected) out << r.row_index << ',' << to_string(r.reason) << '\n';
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

double TargetEncoder::encode(Column c, std::string_view category) const {
  const auto& t = tables_[static_cast<std::size_t>(c)];
  const auto it = t.find(std::string(category));
  return it == t.end() ? prior_ : it->second;
}

TargetEncoder fit_encoder(const Cohort& train, double m, std::string fitted_on) {
  if (train.stage() != Stage::cleaned) {
    throw Error(Errc::WrongStage, "fit_encoder needs a cleaned cohort");
  }
  if (train.empty()) throw Error(Errc::EmptyInput, "fit_encoder on an empty cohort");
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw Error(Errc::InvalidConfig, "smoothing m must be finite and >= 0");
  }
  std::size_t positives = 0;
  for (const auto& r : train.records()) positives += static_cast<std::size_t>(r.soz);
  if (positives == 0 || positives == train.size()) {
    throw Error(Errc::SingleClassTraining, "training labels contain a single class");
  }

  TargetEncoder enc;
  enc.m_ = m;
  enc.prior_ = static_cast<double>(positives) / static_cast<double>(train.size());
  enc.fitted_on_ = std::move(fitted_on);

  std::array<std::map<std::string, std::pair<double, double>>, TargetEncoder::kColumns> counts;
  for (const auto& r : train.records()) {
    const auto keys = category_keys(r.categorical());
    for (std::size_t c = 0; c < TargetEncoder::kColumns; ++c) {
      auto& [n, s] = counts[c][keys[c]];
      n += 1.0;
      s += r.soz;
    }
  }
  for (std::size_t c = 0; c < TargetEncoder::kColumns; ++c) {
    for (const auto& [cat, ns] : counts[c]) {
      const auto [n, s] = ns;
      enc.tables_[c][cat] = (s + m * enc.prior_) / (n + m);
    }
  }
  return enc;
}

Cohort apply_encoder(const TargetEncoder& enc, const Cohort& cohort) {
  if (cohort.stage() != Stage::cleaned) {
    throw Error(Errc::WrongStage, "apply_encoder needs a cleaned cohort");
  }
  using C = TargetEncoder::Column;
  std::vector<CcepRecord> records(cohort.size());
  parallel_for(cohort.size(), [&](std::size_t i) {
    const CcepRecord& src = cohort.records()[i];
    const auto keys = category_keys(src.categorical());
    CcepRecord& dst = records[i];
    dst.patient_id = src.patient_id;
    dst.stim_amplitude = src.stim_amplitude;
    dst.series = src.series;
    dst.soz = src.soz;
    dst.meta = EncodedMeta{enc.encode(C::stim_electrode_id, keys[0]),
                           enc.encode(C::rec_electrode_id, keys[1]),
                           enc.encode(C::stim_region, keys[2]),
                           enc.encode(C::rec_region, keys[3]),
                           enc.encode(C::tissue_type, keys[4]),
                           enc.encode(C::hemisphere, keys[5])};
  });
  return Cohort(Stage::encoded, std::move(records));
}

}  // namespace soz
