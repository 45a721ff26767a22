#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "soz/dataset.hpp"

namespace soz {

inline constexpr double kSamplingRateHz = 1000.0;
/// Amplifier rail used for injected saturation artifacts.
inline constexpr double kAmplifierRailUv = 5000.0;

/// Synthetic cohort parameters. Defaults follow the recording setup: seven
/// patients, 50-90 implanted electrodes each, about 8% of electrodes in the
/// seizure onset zone.
struct GenConfig {
  int n_patients = 7;
  int electrodes_min = 50;
  int electrodes_max = 90;
  double soz_fraction = 0.08;
  std::uint64_t seed = 1;
  double noise_sd = 15.0;       // µV
  double soz_amp_gain = 1.6;    // response gain on SOZ recording electrodes
  double soz_meta_shift = 1.5;  // mA added to stim_amplitude on SOZ rows
  int n_regions = 246;          // atlas size; region codes are opaque
  double artifact_rate = 0.002; // share of trials replaced by saturation/flatline

  /// Throws Error(InvalidConfig) describing the first violated constraint.
  void validate() const;
};

/// One record per ordered (stim, rec) electrode pair per patient, ordered by
/// (patient, stim, rec). Labels attach to the recording electrode.
Cohort generate(const GenConfig& cfg);

/// Relabels so that soz = 1 exactly for rows whose recording electrode is
/// listed for its patient; patients absent from the map get all zeros.
Cohort plant_labels(const Cohort& cohort,
                    const std::map<std::string, std::set<std::string>>& per_patient_soz);

}  // namespace soz
