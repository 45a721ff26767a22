#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "soz/fcn.hpp"
#include "soz/forest.hpp"
#include "soz/gbdt.hpp"
#include "soz/knn_dtw.hpp"
#include "soz/svm.hpp"
#include "soz/synthgen.hpp"

namespace soz {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kVersion = "0.3.0";

enum class Profile { paper, desk };
std::string_view to_string(Profile p) noexcept;

/// Model names accepted in RunConfig::models, in table order.
const std::vector<std::string>& known_models();
/// The members averaged by "soft-ensemble".
const std::vector<std::string>& ensemble_members();

struct PipelineConfig {
  double smoothing_m = 20.0;
  std::size_t smote_k = 5;
  std::size_t n_splits = 7;
  std::optional<double> sat_threshold;  // unset = 4 x p95 of |sample|
  double flat_eps = 1e-6;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 1;
  Profile profile = Profile::desk;
  std::optional<std::string> data;     // raw CSV; the generator is used when unset
  std::optional<std::string> out_dir;
  GenConfig generator;
  PipelineConfig pipeline;
  std::vector<std::string> models;

  DtwConfig knn;
  ForestConfig rf;
  ForestConfig extra_trees;
  BoostConfig gbdt_x;
  BoostConfig gbdt_c;
  SvmConfig svm;
  FcnConfig fcn;

  /// Throws Error(InvalidConfig) on the first violated constraint.
  void validate() const;
};

/// Defaults for a profile: paper = 500/500/1200/1000 estimators and 64 FCN
/// filters; desk = reduced counts sized for a laptop.
RunConfig default_config(Profile profile);

/// Parses a JSON config. Missing fields take the profile defaults; unknown
/// keys are rejected.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out.
std::string config_to_json(const RunConfig& cfg);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace soz
