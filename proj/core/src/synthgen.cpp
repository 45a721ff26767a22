#include "soz/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/rng.hpp"

namespace soz {

namespace {

struct Electrode {
  std::string id;
  std::string region;
  TissueType tissue;
  Hemisphere hemisphere;
  bool soz;
};

struct StimSite {
  double amplitude_ma;
  double strength_uv;
  double n1_latency_ms;
  double n2_latency_ms;
};

std::string patient_name(int p) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "P%02d", p + 1);
  return buf;
}

std::string electrode_name(const std::string& patient, int e) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "-E%02d", e + 1);
  return patient + buf;
}

std::string region_name(int r) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "BN%03d", r + 1);
  return buf;
}

// Damped sinusoid starting at the end of the artifact window, first extremum
// at `latency_ms`.
double damped_component(double t_ms, double latency_ms, double amplitude) {
  const double onset = static_cast<double>(kArtifactSamples);
  if (t_ms < onset) return 0.0;
  const double rise = std::max(latency_ms - onset, 1.0);
  const double phase = (t_ms - onset) / (4.0 * rise);
  const double decay = std::exp(-(t_ms - onset) / (2.0 * rise));
  // Normalise so the first extremum has roughly the requested amplitude.
  const double norm = 1.0 / std::exp(-0.5);
  return amplitude * norm * decay * std::sin(2.0 * std::numbers::pi * phase);
}

std::vector<CcepRecord> generate_patient(const GenConfig& cfg, int p) {
  Rng rng = make_rng(cfg.seed, {0x5eedULL, static_cast<std::uint64_t>(p)});
  const std::string pid = patient_name(p);

  std::uniform_int_distribution<int> n_dist(cfg.electrodes_min, cfg.electrodes_max);
  const int n_e = n_dist(rng);

  std::uniform_int_distribution<int> region_dist(0, cfg.n_regions - 1);
  std::bernoulli_distribution gray(0.65);
  std::bernoulli_distribution left(0.5);
  std::vector<Electrode> electrodes(static_cast<std::size_t>(n_e));
  for (int e = 0; e < n_e; ++e) {
    auto& el = electrodes[static_cast<std::size_t>(e)];
    el.id = electrode_name(pid, e);
    el.region = region_name(region_dist(rng));
    el.tissue = gray(rng) ? TissueType::gray : TissueType::white;
    el.hemisphere = left(rng) ? Hemisphere::left : Hemisphere::right;
    el.soz = false;
  }

  const int n_soz = std::max(1, static_cast<int>(std::lround(cfg.soz_fraction * n_e)));
  std::vector<int> order(static_cast<std::size_t>(n_e));
  for (int e = 0; e < n_e; ++e) order[static_cast<std::size_t>(e)] = e;
  std::shuffle(order.begin(), order.end(), rng);
  for (int k = 0; k < n_soz; ++k) electrodes[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].soz = true;

  std::uniform_real_distribution<double> amp_ma(1.0, 4.0);
  std::uniform_real_distribution<double> strength(40.0, 120.0);
  std::uniform_real_distribution<double> n1(15.0, 30.0);
  std::uniform_real_distribution<double> n2(80.0, 140.0);
  std::vector<StimSite> sites(static_cast<std::size_t>(n_e));
  for (auto& s : sites) {
    s.amplitude_ma = amp_ma(rng);
    s.strength_uv = strength(rng);
    s.n1_latency_ms = n1(rng);
    s.n2_latency_ms = n2(rng);
  }

  const double peak = std::max(8000.0, 100.0 * cfg.noise_sd);
  constexpr std::array<double, kArtifactSamples> kPulseShape = {-1.0, 0.8, -0.6, 0.4, -0.25};

  std::uniform_real_distribution<double> coupling(0.3, 1.0);
  std::uniform_real_distribution<double> jitter(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> sat_start(kArtifactSamples, kRawLength - 20);

  std::vector<CcepRecord> out;
  out.reserve(static_cast<std::size_t>(n_e) * static_cast<std::size_t>(n_e - 1));
  for (int s = 0; s < n_e; ++s) {
    const auto& stim = electrodes[static_cast<std::size_t>(s)];
    const auto& site = sites[static_cast<std::size_t>(s)];
    for (int r = 0; r < n_e; ++r) {
      if (r == s) continue;
      const auto& rec_el = electrodes[static_cast<std::size_t>(r)];
      const double w = coupling(rng);
      const double gain = rec_el.soz ? cfg.soz_amp_gain : 1.0;
      const double a = site.strength_uv * w * gain;
      const double lat1 = site.n1_latency_ms + jitter(rng);
      const double lat2 = site.n2_latency_ms + jitter(rng);

      CcepRecord rec;
      rec.patient_id = pid;
      rec.stim_amplitude = site.amplitude_ma + (rec_el.soz ? cfg.soz_meta_shift : 0.0);
      rec.meta = CategoricalMeta{stim.id, rec_el.id, stim.region, rec_el.region, rec_el.tissue,
                                 rec_el.hemisphere};
      rec.soz = rec_el.soz ? 1 : 0;
      rec.series.resize(kRawLength);
      for (std::size_t t = 0; t < kRawLength; ++t) {
        const double tm = static_cast<double>(t);
        double v = cfg.noise_sd * noise(rng);
        if (t < kArtifactSamples) {
          v += peak * kPulseShape[t];
        } else {
          v += damped_component(tm, lat1, -a) + damped_component(tm, lat2, 0.6 * a);
        }
        rec.series[t] = static_cast<float>(v);
      }

      const double roll = unit(rng);
      if (roll < cfg.artifact_rate * 0.5) {
        const std::size_t start = sat_start(rng);
        const float rail = static_cast<float>(unit(rng) < 0.5 ? -kAmplifierRailUv : kAmplifierRailUv);
        for (std::size_t t = start; t < start + 20; ++t) rec.series[t] = rail;
      } else if (roll < cfg.artifact_rate) {
        std::fill(rec.series.begin() + static_cast<std::ptrdiff_t>(kArtifactSamples),
                  rec.series.end(), 0.0f);
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (n_patients < 1) fail("n_patients must be >= 1");
  if (electrodes_min < 2 || electrodes_max > 512 || electrodes_min > electrodes_max) {
    fail("electrodes_per_patient_range must satisfy 2 <= low <= high <= 512");
  }
  if (!(soz_fraction > 0.0 && soz_fraction <= 0.5)) fail("soz_fraction must lie in (0, 0.5]");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) fail("noise_sd must be finite and >= 0");
  if (!(soz_amp_gain >= 1.0) || !std::isfinite(soz_amp_gain)) fail("soz_amp_gain must be >= 1");
  if (!std::isfinite(soz_meta_shift)) fail("soz_meta_shift must be finite");
  if (n_regions < 1) fail("n_regions must be >= 1");
  if (!(artifact_rate >= 0.0 && artifact_rate < 1.0)) fail("artifact_rate must lie in [0, 1)");
}

Cohort generate(const GenConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<CcepRecord>> per_patient(static_cast<std::size_t>(cfg.n_patients));
  parallel_for(per_patient.size(), [&](std::size_t p) {
    per_patient[p] = generate_patient(cfg, static_cast<int>(p));
  });
  std::vector<CcepRecord> records;
  std::size_t total = 0;
  for (const auto& v : per_patient) total += v.size();
  records.reserve(total);
  for (auto& v : per_patient) {
    std::move(v.begin(), v.end(), std::back_inserter(records));
  }
  return Cohort(Stage::raw, std::move(records));
}

Cohort plant_labels(const Cohort& cohort,
                    const std::map<std::string, std::set<std::string>>& per_patient_soz) {
  std::map<std::string, std::set<std::string>> known;
  for (const auto& rec : cohort.records()) {
    if (const auto* m = std::get_if<CategoricalMeta>(&rec.meta)) {
      known[rec.patient_id].insert(m->rec_electrode_id);
    } else {
      throw Error(Errc::WrongStage, "plant_labels needs categorical electrode ids");
    }
  }
  for (const auto& [patient, electrodes] : per_patient_soz) {
    const auto it = known.find(patient);
    if (it == known.end()) throw Error(Errc::UnknownElectrode, "unknown patient " + patient);
    for (const auto& e : electrodes) {
      if (!it->second.contains(e)) {
        throw Error(Errc::UnknownElectrode, "patient " + patient + " has no electrode " + e);
      }
    }
  }
  std::vector<CcepRecord> records = cohort.records();
  for (auto& rec : records) {
    const auto it = per_patient_soz.find(rec.patient_id);
    const auto& rec_id = std::get<CategoricalMeta>(rec.meta).rec_electrode_id;
    rec.soz = (it != per_patient_soz.end() && it->second.contains(rec_id)) ? 1 : 0;
  }
  return Cohort(cohort.stage(), std::move(records));
}

}  // namespace soz
