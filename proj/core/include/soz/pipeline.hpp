#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "soz/config.hpp"
#include "soz/dataset.hpp"
#include "soz/error.hpp"
#include "soz/model.hpp"
#include "soz/preprocess.hpp"
#include "soz/report.hpp"
#include "soz/splits.hpp"

namespace soz {

/// Context attached to errors raised while running the pipeline.
struct StageContext {
  std::string stage;
  std::optional<std::size_t> split;
  std::string model;
};

/// Rethrows `e` with "stage=... split=... model=..." prefixed, keeping its code.
[[noreturn]] void rethrow_with_context(const Error& e, const StageContext& ctx);

/// Key=value log lines on a stream (stderr by default; null disables).
class RunLog {
 public:
  explicit RunLog(std::ostream* out);
  void event(const StageContext& ctx, const std::string& message, double wall_ms = -1.0) const;

 private:
  std::ostream* out_;
};

/// Fits one named model on a training fold. "soft-ensemble" is not a
/// trainable model.
std::unique_ptr<Classifier> train_model(const std::string& name, const RunConfig& cfg,
                                        const FeatureMatrix& train, std::uint64_t seed);

struct RunResult {
  std::vector<SplitResult> results;
  MetricTable table;
  SplitPlan plan;
  std::vector<Rejection> rejections;
  double sat_threshold = 0.0;
};

/// generate/load -> trim -> reject -> split -> encode (train cohort) ->
/// SMOTE (train fold) -> train -> evaluate, for every split. Writes
/// results.csv, table1.md, table1.csv, splits.json, rejections.csv and
/// manifest.json to `out_dir` when given.
RunResult run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                         const RunLog& log);

/// Same, on an already loaded raw cohort.
RunResult run_experiment(const RunConfig& cfg, const Cohort& raw,
                         const std::optional<std::filesystem::path>& out_dir, const RunLog& log);

}  // namespace soz
