#include "soz/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "soz/error.hpp"

namespace soz {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& msg) { throw Error(Errc::InvalidConfig, msg); }

// Reads the keys of one JSON object and rejects any it was not asked about.
class Block {
 public:
  Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) invalid(name_ + " must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
          invalid(path(key) + " must be a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) invalid(path(key) + " must be true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) invalid(path(key) + " must be an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) invalid(path(key) + " must be a number");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      invalid(path(key) + ": " + e.what());
    }
  }

  const json* find(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) invalid("unknown config key " + path(key.c_str()));
    }
  }

 private:
  std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_forest(Block b, ForestConfig& f) {
  b.read("n_estimators", f.n_estimators);
  b.read("max_depth", f.max_depth);
  b.read("mtry", f.mtry);
  b.read("bootstrap", f.bootstrap);
  b.finish();
}

void read_boost(Block b, BoostConfig& g) {
  b.read("n_estimators", g.n_estimators);
  b.read("learning_rate", g.learning_rate);
  b.read("max_depth", g.max_depth);
  b.read("lambda", g.lambda);
  b.read("gamma", g.gamma);
  b.finish();
}

ordered_json forest_json(const ForestConfig& f) {
  return {{"n_estimators", f.n_estimators},
          {"max_depth", f.max_depth},
          {"mtry", f.mtry},
          {"bootstrap", f.bootstrap}};
}

ordered_json boost_json(const BoostConfig& g) {
  return {{"n_estimators", g.n_estimators}, {"learning_rate", g.learning_rate},
          {"max_depth", g.max_depth},       {"lambda", g.lambda},
          {"gamma", g.gamma}};
}

}  // namespace

std::string_view to_string(Profile p) noexcept { return p == Profile::paper ? "paper" : "desk"; }

const std::vector<std::string>& known_models() {
  static const std::vector<std::string> names = {
      "knn-dtw", "fcn-ts", "fcn-tsm", "svm-poly", "svm-rbf",
      "rf",      "extra-trees", "gbdt-x", "gbdt-c", "soft-ensemble"};
  return names;
}

const std::vector<std::string>& ensemble_members() {
  static const std::vector<std::string> names = {"extra-trees", "rf", "gbdt-x", "gbdt-c"};
  return names;
}

RunConfig default_config(Profile profile) {
  RunConfig cfg;
  cfg.profile = profile;
  cfg.models = known_models();
  cfg.extra_trees.bootstrap = false;
  cfg.gbdt_c.oblivious = true;
  if (profile == Profile::paper) {
    cfg.rf.n_estimators = 500;
    cfg.extra_trees.n_estimators = 500;
    cfg.gbdt_x.n_estimators = 1200;
    cfg.gbdt_c.n_estimators = 1000;
    cfg.fcn.filters = 64;
  } else {
    cfg.rf.n_estimators = 100;
    cfg.extra_trees.n_estimators = 100;
    cfg.gbdt_x.n_estimators = 100;
    cfg.gbdt_c.n_estimators = 100;
    cfg.knn.train_subsample = 2000;
    cfg.svm.train_subsample = 3000;
    cfg.fcn.filters = 16;
    cfg.fcn.epochs = 15;
    cfg.fcn.train_subsample = 4000;
  }
  return cfg;
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    invalid("schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (!data) generator.validate();
  if (pipeline.n_splits < 2) invalid("pipeline.n_splits must be >= 2");
  if (pipeline.smote_k < 1) invalid("pipeline.smote_k must be >= 1");
  if (!(pipeline.smoothing_m >= 0.0) || !std::isfinite(pipeline.smoothing_m)) {
    invalid("pipeline.smoothing_m must be finite and >= 0");
  }
  if (pipeline.sat_threshold && !(*pipeline.sat_threshold > 0.0)) {
    invalid("pipeline.sat_threshold must be > 0");
  }
  if (!(pipeline.flat_eps >= 0.0)) invalid("pipeline.flat_eps must be >= 0");
  if (models.empty()) invalid("models must name at least one model");
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (std::find(known_models().begin(), known_models().end(), m) == known_models().end()) {
      invalid("unknown model '" + m + "'");
    }
    if (!seen.insert(m).second) invalid("model '" + m + "' listed twice");
  }
  if (knn.k < 1) invalid("knn.k must be >= 1");
  if (!(knn.meta_weight >= 0.0)) invalid("knn.meta_weight must be >= 0");
  for (const auto* f : {&rf, &extra_trees}) {
    if (f->n_estimators < 1) invalid("forest n_estimators must be >= 1");
    if (f->max_depth < 1) invalid("forest max_depth must be >= 1");
  }
  for (const auto* g : {&gbdt_x, &gbdt_c}) {
    if (!(g->learning_rate > 0.0 && g->learning_rate <= 1.0)) {
      invalid("boosting learning_rate must lie in (0, 1]");
    }
    if (!(g->lambda >= 0.0)) invalid("boosting lambda must be >= 0");
    if (!(g->gamma >= 0.0)) invalid("boosting gamma must be >= 0");
  }
  if (!(svm.c > 0.0)) invalid("svm.c must be > 0");
  if (!(svm.tol > 0.0)) invalid("svm.tol must be > 0");
  if (svm.gamma < 0.0) invalid("svm.gamma must be > 0 (or 0 for 1/d)");
  if (svm.degree < 1) invalid("svm.degree must be >= 1");
  if (!(fcn.lr > 0.0)) invalid("fcn.lr must be > 0");
  if (fcn.batch_size < 1) invalid("fcn.batch_size must be >= 1");
  if (fcn.filters < 1) invalid("fcn.filters must be >= 1");
  if (!(fcn.meta_gain >= 0.0) || !std::isfinite(fcn.meta_gain)) {
    invalid("fcn.meta_gain must be finite and >= 0");
  }
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("config must be a JSON object");

  Profile profile = Profile::desk;
  if (const auto it = j.find("profile"); it != j.end()) {
    if (*it == "paper") {
      profile = Profile::paper;
    } else if (*it != "desk") {
      invalid("profile must be \"paper\" or \"desk\"");
    }
  }
  RunConfig cfg = default_config(profile);

  Block top(j, "");
  std::string profile_name;
  top.read("profile", profile_name);
  top.read("schema_version", cfg.schema_version);
  if (!j.contains("schema_version")) invalid("schema_version is required");
  top.read("seed", cfg.seed);
  if (const json* v = top.find("data")) {
    if (!v->is_string()) invalid("data must be a path string");
    cfg.data = v->get<std::string>();
  }
  if (const json* v = top.find("out_dir")) {
    if (!v->is_string()) invalid("out_dir must be a path string");
    cfg.out_dir = v->get<std::string>();
  }
  if (const json* v = top.find("models")) {
    if (!v->is_array()) invalid("models must be an array of names");
    cfg.models.clear();
    for (const auto& m : *v) {
      if (!m.is_string()) invalid("models must be an array of names");
      cfg.models.push_back(m.get<std::string>());
    }
  }

  cfg.generator.seed = cfg.seed;
  if (const json* v = top.find("generator")) {
    Block b(*v, "generator");
    GenConfig& g = cfg.generator;
    b.read("n_patients", g.n_patients);
    if (const json* r = b.find("electrodes_per_patient_range")) {
      if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number_integer() ||
          !(*r)[1].is_number_integer()) {
        invalid("generator.electrodes_per_patient_range must be [low, high]");
      }
      g.electrodes_min = (*r)[0].get<int>();
      g.electrodes_max = (*r)[1].get<int>();
    }
    b.read("soz_fraction", g.soz_fraction);
    b.read("seed", g.seed);
    b.read("noise_sd", g.noise_sd);
    b.read("soz_amp_gain", g.soz_amp_gain);
    b.read("soz_meta_shift", g.soz_meta_shift);
    b.read("n_regions", g.n_regions);
    b.read("artifact_rate", g.artifact_rate);
    b.finish();
  }
  if (const json* v = top.find("pipeline")) {
    Block b(*v, "pipeline");
    PipelineConfig& p = cfg.pipeline;
    b.read("smoothing_m", p.smoothing_m);
    b.read("smote_k", p.smote_k);
    b.read("n_splits", p.n_splits);
    if (const json* s = b.find("sat_threshold")) {
      if (s->is_null()) {
        p.sat_threshold.reset();
      } else if (s->is_number()) {
        p.sat_threshold = s->get<double>();
      } else {
        invalid("pipeline.sat_threshold must be a number or null");
      }
    }
    b.read("flat_eps", p.flat_eps);
    b.finish();
  }
  if (const json* v = top.find("knn")) {
    Block b(*v, "knn");
    b.read("k", cfg.knn.k);
    b.read("band_radius", cfg.knn.band_radius);
    b.read("meta_weight", cfg.knn.meta_weight);
    b.read("train_subsample", cfg.knn.train_subsample);
    b.finish();
  }
  if (const json* v = top.find("rf")) read_forest(Block(*v, "rf"), cfg.rf);
  if (const json* v = top.find("extra_trees")) read_forest(Block(*v, "extra_trees"), cfg.extra_trees);
  if (const json* v = top.find("gbdt_x")) read_boost(Block(*v, "gbdt_x"), cfg.gbdt_x);
  if (const json* v = top.find("gbdt_c")) read_boost(Block(*v, "gbdt_c"), cfg.gbdt_c);
  if (const json* v = top.find("svm")) {
    Block b(*v, "svm");
    b.read("c", cfg.svm.c);
    b.read("gamma", cfg.svm.gamma);
    b.read("degree", cfg.svm.degree);
    b.read("coef0", cfg.svm.coef0);
    b.read("tol", cfg.svm.tol);
    b.read("max_passes", cfg.svm.max_passes);
    b.read("cache_mb", cfg.svm.cache_mb);
    b.read("train_subsample", cfg.svm.train_subsample);
    b.finish();
  }
  if (const json* v = top.find("fcn")) {
    Block b(*v, "fcn");
    b.read("lr", cfg.fcn.lr);
    b.read("epochs", cfg.fcn.epochs);
    b.read("batch_size", cfg.fcn.batch_size);
    b.read("filters", cfg.fcn.filters);
    b.read("train_subsample", cfg.fcn.train_subsample);
    b.read("meta_gain", cfg.fcn.meta_gain);
    b.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["profile"] = std::string(to_string(cfg.profile));
  if (cfg.data) j["data"] = *cfg.data;
  if (cfg.out_dir) j["out_dir"] = *cfg.out_dir;
  j["models"] = cfg.models;
  const GenConfig& g = cfg.generator;
  j["generator"] = {{"n_patients", g.n_patients},
                    {"electrodes_per_patient_range", {g.electrodes_min, g.electrodes_max}},
                    {"soz_fraction", g.soz_fraction},
                    {"seed", g.seed},
                    {"noise_sd", g.noise_sd},
                    {"soz_amp_gain", g.soz_amp_gain},
                    {"soz_meta_shift", g.soz_meta_shift},
                    {"n_regions", g.n_regions},
                    {"artifact_rate", g.artifact_rate}};
  const PipelineConfig& p = cfg.pipeline;
  j["pipeline"] = {{"smoothing_m", p.smoothing_m},
                   {"smote_k", p.smote_k},
                   {"n_splits", p.n_splits},
                   {"sat_threshold", p.sat_threshold ? ordered_json(*p.sat_threshold) : ordered_json()},
                   {"flat_eps", p.flat_eps}};
  j["knn"] = {{"k", cfg.knn.k},
              {"band_radius", cfg.knn.band_radius},
              {"meta_weight", cfg.knn.meta_weight},
              {"train_subsample", cfg.knn.train_subsample}};
  j["rf"] = forest_json(cfg.rf);
  j["extra_trees"] = forest_json(cfg.extra_trees);
  j["gbdt_x"] = boost_json(cfg.gbdt_x);
  j["gbdt_c"] = boost_json(cfg.gbdt_c);
  j["svm"] = {{"c", cfg.svm.c},
              {"gamma", cfg.svm.gamma},
              {"degree", cfg.svm.degree},
              {"coef0", cfg.svm.coef0},
              {"tol", cfg.svm.tol},
              {"max_passes", cfg.svm.max_passes},
              {"cache_mb", cfg.svm.cache_mb},
              {"train_subsample", cfg.svm.train_subsample}};
  j["fcn"] = {{"lr", cfg.fcn.lr},
              {"epochs", cfg.fcn.epochs},
              {"batch_size", cfg.fcn.batch_size},
              {"filters", cfg.fcn.filters},
              {"train_subsample", cfg.fcn.train_subsample},
              {"meta_gain", cfg.fcn.meta_gain}};
  return j.dump(2) + "\n";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace soz
