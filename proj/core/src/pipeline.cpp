#include "soz/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "soz/error.hpp"
#include "soz/metrics.hpp"
#include "soz/parallel.hpp"
#include "soz/resample.hpp"

namespace soz {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string context_prefix(const StageContext& ctx) {
  std::string out = "stage=" + ctx.stage;
  if (ctx.split) out += " split=" + std::to_string(*ctx.split);
  if (!ctx.model.empty()) out += " model=" + ctx.model;
  return out;
}

template <class F>
auto with_context(const StageContext& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_context(e, ctx);
  }
}

std::size_t model_key(const std::string& name) {
  const auto& all = known_models();
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), name) - all.begin());
}

// Test rows must be untouched originals; every synthetic training row must be
// built from a training row of a training patient.
void audit_provenance(const FeatureMatrix& before, const FeatureMatrix& after,
                      const FeatureMatrix& test) {
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (test.origins()[i].synthetic) {
      throw Error(Errc::SyntheticInTest, "test row " + std::to_string(i) + " is synthetic");
    }
  }
  std::set<std::int64_t> train_sources;
  std::set<std::string> train_patients;
  for (std::size_t i = 0; i < before.rows(); ++i) {
    train_sources.insert(before.origins()[i].source_row);
    train_patients.insert(before.patient_keys()[i]);
  }
  if (after.rows() < before.rows()) {
    throw Error(Errc::SyntheticInTest, "oversampling dropped training rows");
  }
  for (std::size_t i = 0; i < after.rows(); ++i) {
    const RowOrigin& o = after.origins()[i];
    if (i < before.rows() && (o != before.origins()[i] || after.labels()[i] != before.labels()[i])) {
      throw Error(Errc::SyntheticInTest, "oversampling altered original training row " +
                                             std::to_string(i));
    }
    if (!train_sources.contains(o.source_row) || !train_patients.contains(after.patient_keys()[i])) {
      throw Error(Errc::SyntheticInTest, "training row " + std::to_string(i) +
                                             " derives from a row outside the training fold");
    }
  }
  std::set<std::int64_t> test_sources;
  for (const auto& o : test.origins()) test_sources.insert(o.source_row);
  for (auto s : test_sources) {
    if (train_sources.contains(s)) {
      throw Error(Errc::SyntheticInTest, "cohort row " + std::to_string(s) + " is in both folds");
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace

void rethrow_with_context(const Error& e, const StageContext& ctx) {
  throw Error(e.code(), context_prefix(ctx) + ": " + e.what());
}

RunLog::RunLog(std::ostream* out) : out_(out) {}

void RunLog::event(const StageContext& ctx, const std::string& message, double wall_ms) const {
  if (out_ == nullptr) return;
  std::ostringstream line;
  line << context_prefix(ctx);
  if (!message.empty()) line << ' ' << message;
  if (wall_ms >= 0.0) line << " wall_ms=" << static_cast<long long>(wall_ms + 0.5);
  line << '\n';
  *out_ << line.str() << std::flush;
}

std::unique_ptr<Classifier> train_model(const std::string& name, const RunConfig& cfg,
                                        const FeatureMatrix& train, std::uint64_t seed) {
  if (name == "knn-dtw") {
    DtwConfig c = cfg.knn;
    c.seed = seed;
    return std::make_unique<KnnDtwModel>(knn_fit(train, c));
  }
  if (name == "rf") {
    ForestConfig c = cfg.rf;
    c.seed = seed;
    return std::make_unique<ForestModel>(fit_random_forest(train, c));
  }
  if (name == "extra-trees") {
    ForestConfig c = cfg.extra_trees;
    c.seed = seed;
    return std::make_unique<ForestModel>(fit_extra_trees(train, c));
  }
  if (name == "gbdt-x" || name == "gbdt-c") {
    BoostConfig c = name == "gbdt-x" ? cfg.gbdt_x : cfg.gbdt_c;
    c.oblivious = name == "gbdt-c";
    c.seed = seed;
    return std::make_unique<GbdtModel>(fit_gbdt(train, c));
  }
  if (name == "svm-poly" || name == "svm-rbf") {
    SvmConfig c = cfg.svm;
    c.kernel = name == "svm-poly" ? KernelKind::poly : KernelKind::rbf;
    c.seed = seed;
    return std::make_unique<SvmModel>(svm_fit(train, c));
  }
  if (name == "fcn-ts" || name == "fcn-tsm") {
    FcnConfig c = cfg.fcn;
    c.variant = name == "fcn-ts" ? FcnVariant::ts : FcnVariant::tsm;
    c.seed = seed;
    return std::make_unique<FcnModel>(fcn_train(train, c));
  }
  throw Error(Errc::InvalidConfig, "model '" + name + "' cannot be trained directly");
}

RunResult run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                         const RunLog& log) {
  cfg.validate();
  const auto t0 = Clock::now();
  Cohort raw = with_context({"load", {}, {}}, [&] {
    return cfg.data ? load_csv(*cfg.data, Stage::raw) : generate(cfg.generator);
  });
  log.event({"load", {}, {}}, "records=" + std::to_string(raw.size()) +
                                  " patients=" + std::to_string(raw.patients().size()),
            ms_since(t0));
  return run_experiment(cfg, raw, out_dir, log);
}

RunResult run_experiment(const RunConfig& cfg, const Cohort& raw,
                         const std::optional<std::filesystem::path>& out_dir, const RunLog& log) {
  cfg.validate();
  if (out_dir) {
    with_context({"output", {}, {}}, [&] {
      std::error_code ec;
      std::filesystem::create_directories(*out_dir, ec);
      if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir->string() + ": " + ec.message());
      return 0;
    });
  }
  RunResult run;

  // Clean.
  auto t = Clock::now();
  const Cohort cleaned = with_context({"clean", {}, {}}, [&] {
    const Cohort trimmed = trim_artifact(raw);
    run.sat_threshold = cfg.pipeline.sat_threshold ? *cfg.pipeline.sat_threshold
                                                   : default_saturation_threshold(trimmed);
    RejectionResult r = reject_artifacts(trimmed, run.sat_threshold, cfg.pipeline.flat_eps);
    run.rejections = std::move(r.rejected);
    if (out_dir) write_rejections_csv(run.rejections, *out_dir / "rejections.csv");
    return std::move(r.kept);
  });
  log.event({"clean", {}, {}},
            "kept=" + std::to_string(cleaned.size()) +
                " rejected=" + std::to_string(run.rejections.size()) +
                " sat_threshold=" + format_shortest(run.sat_threshold),
            ms_since(t));

  // Splits.
  run.plan = with_context({"splits", {}, {}}, [&] {
    SplitPlan plan = make_splits(cleaned.patients(), cfg.pipeline.n_splits,
                                 derive_seed(cfg.seed, {0x5917ULL}));
    if (out_dir) write_splits_json(plan, *out_dir / "splits.json");
    return plan;
  });

  // Models to fit: the listed ones plus the ensemble members when needed.
  const bool want_ensemble =
      std::find(cfg.models.begin(), cfg.models.end(), "soft-ensemble") != cfg.models.end();
  std::vector<std::string> fit_names;
  for (const auto& m : cfg.models) {
    if (m != "soft-ensemble") fit_names.push_back(m);
  }
  if (want_ensemble) {
    for (const auto& m : ensemble_members()) {
      if (std::find(fit_names.begin(), fit_names.end(), m) == fit_names.end()) fit_names.push_back(m);
    }
  }

  for (std::size_t s = 0; s < run.plan.splits.size(); ++s) {
    const SplitEntry& split = run.plan.splits[s];
    t = Clock::now();
    const auto [train, test] = with_context({"encode", s, {}}, [&] {
      const CohortPair cohorts = partition_cohort(cleaned, split);
      const TargetEncoder enc =
          fit_encoder(cohorts.train, cfg.pipeline.smoothing_m, "split-" + std::to_string(s));
      // Encoding reads only the fitted tables, so encoding the whole cohort
      // and routing rows afterwards keeps cohort row indices as provenance.
      const FeatureMatrix full = to_matrix(apply_encoder(enc, cleaned), true);
      FoldPair folds = partition(full, split);
      check_patient_disjoint(folds.train.matrix(), folds.test.matrix());
      return std::pair<TrainFold, TestFold>(std::move(folds.train), std::move(folds.test));
    });
    log.event({"encode", s, {}},
              "train_rows=" + std::to_string(train.matrix().rows()) +
                  " test_rows=" + std::to_string(test.matrix().rows()),
              ms_since(t));

    t = Clock::now();
    const TrainFold balanced = with_context({"smote", s, {}}, [&] {
      TrainFold out = smote(train, {cfg.pipeline.smote_k, derive_seed(cfg.seed, {0x5307eULL, s})});
      audit_provenance(train.matrix(), out.matrix(), test.matrix());
      return out;
    });
    log.event({"smote", s, {}}, "rows=" + std::to_string(balanced.matrix().rows()), ms_since(t));

    std::vector<Prediction> preds(fit_names.size());
    parallel_for(fit_names.size(), [&](std::size_t m) {
      const std::string& name = fit_names[m];
      const StageContext ctx{"train", s, name};
      const auto tm = Clock::now();
      const auto model = with_context(ctx, [&] {
        return train_model(name, cfg, balanced.matrix(),
                           derive_seed(cfg.seed, {0x40deULL, s, model_key(name)}));
      });
      log.event(ctx, "", ms_since(tm));
      const auto tp = Clock::now();
      preds[m] = with_context({"predict", s, name}, [&] { return model->predict(test.matrix()); });
      log.event({"predict", s, name}, "", ms_since(tp));
    });

    const auto& y = test.matrix().labels();
    for (const auto& name : cfg.models) {
      Prediction p;
      if (name == "soft-ensemble") {
        std::vector<ProbaMatrix> members;
        for (const auto& m : ensemble_members()) {
          const auto idx = std::find(fit_names.begin(), fit_names.end(), m) - fit_names.begin();
          members.push_back(preds[static_cast<std::size_t>(idx)].proba);
        }
        p.proba = soft_ensemble(members);
        p.labels = argmax_labels(p.proba);
        p.scores = p.proba.positive_column();
      } else {
        const auto idx = std::find(fit_names.begin(), fit_names.end(), name) - fit_names.begin();
        p = preds[static_cast<std::size_t>(idx)];
      }
      const auto r = with_context({"evaluate", s, name}, [&] {
        const ConfusionMetrics cm = confusion_metrics(y, p.labels);
        SplitResult out;
        out.model = name;
        out.split = s;
        out.values = {cm.macro_precision, cm.macro_recall, roc_auc(y, p.scores), cm.accuracy};
        return out;
      });
      log.event({"evaluate", s, name}, "roc_auc=" + format_shortest(r.get(Metric::roc_auc)) +
                                           " accuracy=" + format_shortest(r.get(Metric::accuracy)));
      run.results.push_back(r);
    }
  }

  run.table = with_context({"report", {}, {}}, [&] { return aggregate(run.results); });
  if (out_dir) {
    with_context({"report", {}, {}}, [&] {
      write_results_csv(run.results, *out_dir / "results.csv");
      write_text(*out_dir / "table1.md", render_markdown(run.table));
      write_text(*out_dir / "table1.csv", render_csv(run.table));
      const std::string canonical = config_to_json(cfg);
      nlohmann::ordered_json manifest;
      manifest["tool"] = "soz";
      manifest["version"] = std::string(kVersion);
      manifest["schema_version"] = kSchemaVersion;
      manifest["config_hash"] = fnv1a_hex(canonical);
      manifest["seed"] = cfg.seed;
      manifest["profile"] = std::string(to_string(cfg.profile));
      manifest["threads"] = thread_count();
      manifest["records"] = raw.size();
      manifest["rejected"] = run.rejections.size();
      manifest["sat_threshold"] = run.sat_threshold;
      manifest["splits"] = run.plan.splits.size();
      manifest["models"] = cfg.models;
      manifest["outputs"] = {"results.csv", "table1.md",      "table1.csv",
                             "splits.json", "rejections.csv", "manifest.json"};
      manifest["config"] = nlohmann::ordered_json::parse(canonical);
      write_text(*out_dir / "manifest.json", manifest.dump(2) + "\n");
      return 0;
    });
  }
  return run;
}

}  // namespace soz
