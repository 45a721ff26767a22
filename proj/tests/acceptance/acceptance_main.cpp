// Acceptance checks 1-8. Each criterion prints one PASS/FAIL line; the exit
// code is non-zero when the selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "soz/config.hpp"
#include "soz/error.hpp"
#include "soz/fcn.hpp"
#include "soz/forest.hpp"
#include "soz/gbdt.hpp"
#include "soz/knn_dtw.hpp"
#include "soz/metrics.hpp"
#include "soz/parallel.hpp"
#include "soz/pipeline.hpp"
#include "soz/preprocess.hpp"
#include "soz/resample.hpp"
#include "soz/splits.hpp"
#include "soz/svm.hpp"
#include "soz/synthgen.hpp"

using namespace soz;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path config_dir;

RunConfig config_file(const std::string& name) { return load_config(config_dir / name); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

// ---------------------------------------------------------------- 1

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);

  std::size_t dtw_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 6;
    const std::size_t m = 1 + rng() % 6;
    const auto a = gaussian(rng, n);
    const auto b = gaussian(rng, m);
    if (std::abs(dtw(a, b, kUnboundedBand) - oracle::dtw_paths(a, b)) > 1e-9) ++dtw_bad;
  }
  o.require(dtw_bad == 0, std::to_string(dtw_bad) + " DTW mismatches");

  std::size_t auc_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng() % 80;
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % 2);
      s[i] = static_cast<double>(rng() % 10);
    }
    y[0] = 0;
    y[1] = 1;
    if (roc_auc(y, s) != oracle::auc_pairs(y, s)) ++auc_bad;
  }
  o.require(auc_bad == 0, std::to_string(auc_bad) + " AUC mismatches");

  // SMOTE: 1,000 synthetics from 40 minority rows among 1,040.
  {
    const std::size_t n_min = 40;
    const std::size_t n_maj = 1040;
    const std::size_t k = 5;
    std::vector<double> v;
    std::vector<int> y;
    for (std::size_t i = 0; i < n_min + n_maj; ++i) {
      const auto r = gaussian(rng, 6);
      v.insert(v.end(), r.begin(), r.end());
      y.push_back(i < n_min ? 1 : 0);
    }
    const FeatureMatrix m = fixture::matrix(fixture::columns(0, 6), v, y);
    const FoldPair f = partition(m, {{"P"}, {}});
    const FeatureMatrix out = smote(f.train, {k, 77}).matrix();
    std::size_t synth = 0;
    std::size_t seg_bad = 0;
    std::size_t hull_bad = 0;
    for (std::size_t s = m.rows(); s < out.rows(); ++s) {
      ++synth;
      const auto base = static_cast<std::size_t>(out.origins()[s].source_row);
      std::vector<double> dist;
      for (std::size_t j = 0; j < n_min; ++j)
        dist.push_back(j == base ? 1e300 : oracle::squared_distance(m.row(base), m.row(j)));
      bool found = false;
      for (std::size_t j : oracle::k_smallest(dist, k))
        found = found || oracle::on_segment(out.row(s), m.row(base), m.row(j));
      if (!found) ++seg_bad;
      for (std::size_t c = 0; c < 6; ++c) {
        double lo = 1e300;
        double hi = -1e300;
        for (std::size_t j = 0; j < n_min; ++j) {
          lo = std::min(lo, m.at(j, c));
          hi = std::max(hi, m.at(j, c));
        }
        if (out.at(s, c) < lo || out.at(s, c) > hi) ++hull_bad;
      }
    }
    o.require(synth == 1000, "expected 1000 synthetics, got " + std::to_string(synth));
    o.require(seg_bad == 0, std::to_string(seg_bad) + " synthetics off every k-NN segment");
    o.require(hull_bad == 0, std::to_string(hull_bad) + " coordinates outside the minority hull");
  }

  // KNN against a brute-force scan with the path-enumeration DTW.
  std::size_t knn_bad = 0;
  for (int t = 0; t < 10; ++t) {
    const FeatureMatrix train = fixture::random_matrix(50, 6, 2, 0.4, 500 + t);
    const FeatureMatrix test = fixture::random_matrix(20, 6, 2, 0.4, 600 + t);
    DtwConfig cfg;
    cfg.band_radius = static_cast<std::size_t>(t % 4);
    const KnnDtwModel model = knn_fit(train, cfg);
    const ProbaMatrix p = model.predict_proba(test);
    for (std::size_t i = 0; i < test.rows(); ++i) {
      std::vector<double> dist;
      for (std::size_t j = 0; j < train.rows(); ++j)
        dist.push_back(oracle::dtw_paths(test.row(i).first(6), train.row(j).first(6), cfg.band_radius) +
                       oracle::squared_distance(test.row(i).subspan(6), train.row(j).subspan(6)));
      const auto nn = oracle::k_smallest(dist, 3);
      double pos = 0;
      for (std::size_t j : nn) pos += train.labels()[j];
      if (model.neighbors(test.row(i)) != nn || p(i, 1) != pos / 3.0) ++knn_bad;
    }
  }
  o.require(knn_bad == 0, std::to_string(knn_bad) + " KNN rows differ from the brute-force scan");

  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt(secs, 1) + " s exceeds 60 s");
  o.note("dtw 200, auc 500, smote 1000, knn 200 rows checked in " + fmt(secs, 2) + " s");
  return o;
}

// ---------------------------------------------------------------- 2

double kkt_residual(const SvmModel& m, double c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.alphas().size(); ++i) {
    const double a = m.alphas()[i];
    const double yf = m.signed_labels()[i] * m.train_decisions()[i];
    double r;
    if (a <= 1e-12 * c) r = std::max(0.0, 1.0 - yf);
    else if (a >= c * (1 - 1e-12)) r = std::max(0.0, yf - 1.0);
    else r = std::abs(yf - 1.0);
    worst = std::max(worst, r);
  }
  return worst;
}

Outcome criterion2() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
      const double a = z(rng);
      const double b = z(rng);
      v.insert(v.end(), {a, b});
      y.push_back(a * b + 0.3 * z(rng) > 0 ? 1 : 0);
    }
    SvmConfig cfg;
    cfg.kernel = seed % 2 ? KernelKind::poly : KernelKind::rbf;
    const SvmModel m = svm_fit(fixture::matrix({"a", "b"}, v, y), cfg);
    o.require(m.converged(), "problem " + std::to_string(seed) + " hit the iteration cap");
    worst = std::max(worst, kkt_residual(m, cfg.c));
  }
  o.require(worst <= 1e-3, "max KKT residual " + fmt(worst, 6) + " > tol");

  SvmConfig lin;
  lin.kernel = KernelKind::poly;
  lin.degree = 1;
  lin.gamma = 1.0;
  lin.coef0 = 0.0;
  lin.c = 1e6;
  lin.standardize = false;
  const SvmModel two = svm_fit(fixture::matrix({"x"}, {-1.0, 1.0}, {0, 1}), lin);
  o.require(two.alphas()[0] == 0.5 && two.alphas()[1] == 0.5 && two.bias() == 0.0,
            "2-point dual gave alpha=(" + fmt(two.alphas()[0], 17) + ", " +
                fmt(two.alphas()[1], 17) + ") b=" + fmt(two.bias(), 17));

  const FeatureMatrix sep = fixture::separable_2d(100, 31);
  SvmConfig hard;
  hard.c = 1e6;
  const auto labels = svm_fit(sep, hard).predict_labels(sep);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += labels[i] != sep.labels()[i];
  o.require(wrong == 0, std::to_string(wrong) + " training errors on separable data");
  o.note("max KKT residual " + fmt(worst, 6) + " over 20 problems");
  return o;
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
  Outcome o;
  o.require(leaf_weight(2.0, 4.0, 1.0) == -0.4, "leaf weight(G=2,H=4,l=1) != -0.4");
  {
    // One-leaf tree on constant features: value must be -G/(H+l).
    const FeatureMatrix m = fixture::matrix({"a"}, {1, 1, 1}, {0, 1, 0});
    const std::vector<double> g = {0.5, -0.25, 1.0};
    const std::vector<double> h = {0.25, 0.5, 1.0};
    const DecisionTree t = grow_boosting_tree(ColumnStore(m), g, h, {});
    o.require(t.nodes().size() == 1 && t.nodes()[0].value == -1.25 / 2.75,
              "single-leaf weight differs from -G/(H+l)");
  }

  std::mt19937_64 rng(3003);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v;
  std::vector<int> y;
  for (int i = 0; i < 500; ++i) {
    double s = 0;
    for (int c = 0; c < 8; ++c) {
      const double x = z(rng);
      v.push_back(x);
      if (c < 3) s += x;
    }
    y.push_back(s + z(rng) > 0.5 ? 1 : 0);
  }
  const FeatureMatrix m = fixture::matrix(fixture::columns(0, 8), v, y);
  double worst = 0.0;
  for (bool oblivious : {false, true}) {
    BoostConfig c;
    c.n_estimators = 100;
    c.oblivious = oblivious;
    const auto loss = fit_gbdt(m, c).train_loss();
    for (std::size_t r = 1; r < loss.size(); ++r) worst = std::max(worst, loss[r] - loss[r - 1]);
    o.require(loss.size() == 101, "loss trace length");
  }
  o.require(worst <= 1e-9, "training loss rose by " + fmt(worst, 12));

  // Structural check on a gbdt-c model trained by the pipeline path.
  RunConfig cfg = default_config(Profile::desk);
  const Cohort t = trim_artifact(generate(fixture::small_gen(4, 14, 9)));
  const FeatureMatrix enc = to_matrix(apply_encoder(fit_encoder(t, 20.0), t), true);
  const auto model = train_model("gbdt-c", cfg, enc, 1);
  const auto* g = dynamic_cast<const GbdtModel*>(model.get());
  std::size_t bad_levels = 0;
  for (const auto& tree : g->trees())
    for (const auto& level : tree.splits_by_depth())
      for (const auto& s : level) bad_levels += s != level.front();
  o.require(bad_levels == 0, std::to_string(bad_levels) + " nodes break the shared-split rule");
  o.note(std::to_string(g->trees().size()) + " gbdt-c trees checked, max loss step " + fmt(worst, 12));
  return o;
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
  Outcome o;
  Rng rng(4004);
  const FcnNet net(20, 8, rng);
  std::mt19937_64 data_rng(4005);
  const auto inputs = gaussian(data_rng, 4 * 20);
  const std::vector<int> labels = {1, 0, 0, 1};
  std::vector<double> grad;
  fcn_loss(net, inputs, labels, &grad);
  FcnNet probe = net;
  std::size_t ok = 0;
  const std::size_t total = grad.size();
  for (std::size_t p = 0; p < total; ++p) {
    const double keep = probe.params()[p];
    probe.params()[p] = keep + 1e-4;
    const double up = fcn_loss(probe, inputs, labels);
    probe.params()[p] = keep - 1e-4;
    const double down = fcn_loss(probe, inputs, labels);
    probe.params()[p] = keep;
    const double num = (up - down) / 2e-4;
    const double denom = std::max({std::abs(num), std::abs(grad[p]), 1e-7});
    ok += std::abs(num - grad[p]) / denom <= 1e-3;
  }
  const double frac = static_cast<double>(ok) / static_cast<double>(total);
  o.require(frac >= 0.99, "gradient agreement " + fmt(100 * frac, 2) + "% < 99%");

  FcnShapes shapes;
  const FcnNet full(502, 16, rng);
  const auto x = gaussian(data_rng, 8 * 502);
  const auto probs = fcn_forward(full, x, 8, false, &shapes);
  bool shapes_ok = probs.size() == 16 && shapes.pooled == 16 && shapes.block_outputs.size() == 3;
  for (const auto& [ch, len] : shapes.block_outputs) shapes_ok = shapes_ok && ch == 16 && len == 502;
  for (std::size_t i = 0; i < 8; ++i)
    shapes_ok = shapes_ok && std::abs(probs[2 * i] + probs[2 * i + 1] - 1.0) <= 1e-6 &&
                probs[2 * i] > 0.0 && probs[2 * i] < 1.0;
  o.require(shapes_ok, "shape or softmax invariant violated");

  // Separable set: class 1 carries a bump near sample 15.
  std::vector<double> v;
  std::vector<int> y;
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const int label = i % 2;
    for (int t = 0; t < 60; ++t)
      v.push_back((label ? 2.0 * std::exp(-0.05 * (t - 15) * (t - 15)) : 0.0) + 0.3 * z(data_rng));
    y.push_back(label);
  }
  FcnConfig cfg;
  cfg.filters = 8;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = 4;
  const auto loss = fcn_train(fixture::matrix(fixture::columns(60, 0), v, y), cfg).loss_history();
  o.require(loss.size() == 6 && loss[5] < loss[0],
            "loss epoch0 " + fmt(loss[0]) + " -> epoch5 " + fmt(loss.back()));
  o.note("gradient agreement " + fmt(100 * frac, 2) + "% of " + std::to_string(total) +
         " params; loss " + fmt(loss[0]) + " -> " + fmt(loss.back()));
  return o;
}

// ---------------------------------------------------------------- 5

std::string strip_labels(const Cohort& c) {
  std::ostringstream out;
  write_csv(c, out);
  std::istringstream in(out.str());
  std::string line;
  std::string body;
  while (std::getline(in, line)) body += line.substr(0, line.rfind(',')) + "\n";
  return body;
}

Outcome criterion5() {
  Outcome o;
  GenConfig g = fixture::small_gen(7, 12, 55);
  const Cohort cleaned = trim_artifact(generate(g));
  const SplitPlan plan = make_splits(cleaned.patients(), 7, 5);
  std::size_t checked = 0;
  for (std::size_t s = 0; s < plan.splits.size(); ++s) {
    const SplitEntry& split = plan.splits[s];
    const CohortPair cp = partition_cohort(cleaned, split);
    const TargetEncoder enc = fit_encoder(cp.train, 20.0);
    const FeatureMatrix full = to_matrix(apply_encoder(enc, cleaned), true);
    const FoldPair folds = partition(full, split);

    std::set<std::string> tr(folds.train.matrix().patient_keys().begin(),
                             folds.train.matrix().patient_keys().end());
    bool disjoint = true;
    for (const auto& k : folds.test.matrix().patient_keys()) disjoint = disjoint && !tr.count(k);
    o.require(disjoint, "split " + std::to_string(s) + " shares a patient");
    try {
      check_patient_disjoint(folds.train.matrix(), folds.test.matrix());
    } catch (const Error& e) {
      o.require(false, e.what());
    }

    std::vector<CcepRecord> flipped = cp.test.records();
    std::vector<CcepRecord> shuffled = cp.test.records();
    std::mt19937_64 rng(s);
    std::vector<int> labels;
    for (const auto& r : shuffled) labels.push_back(r.soz);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      shuffled[i].soz = labels[i];
      flipped[i].soz = 1 - flipped[i].soz;
    }
    const std::string base = strip_labels(apply_encoder(enc, cp.test));
    o.require(base == strip_labels(apply_encoder(enc, Cohort(Stage::cleaned, flipped))) &&
                  base == strip_labels(apply_encoder(enc, Cohort(Stage::cleaned, shuffled))),
              "encoder output depends on test labels in split " + std::to_string(s));

    const FeatureMatrix over = smote(folds.train, {5, s}).matrix();
    std::set<std::int64_t> train_rows;
    for (const auto& origin : folds.train.matrix().origins()) train_rows.insert(origin.source_row);
    std::size_t foreign = 0;
    for (std::size_t i = 0; i < over.rows(); ++i) {
      foreign += !train_rows.count(over.origins()[i].source_row);
      foreign += !tr.count(over.patient_keys()[i]);
    }
    for (const auto& origin : folds.test.matrix().origins()) foreign += origin.synthetic;
    o.require(foreign == 0, std::to_string(foreign) + " provenance violations in split " +
                                std::to_string(s));
    ++checked;
  }

  // The runner performs the same assertions on every split of a real run.
  RunConfig cfg = config_file("smoke.json");
  cfg.models = {"rf"};
  cfg.pipeline.n_splits = 7;
  cfg.generator.n_patients = 7;
  try {
    run_experiment(cfg, std::nullopt, RunLog(nullptr));
  } catch (const Error& e) {
    o.require(false, std::string("pipeline run failed: ") + e.what());
  }
  o.note(std::to_string(checked) + " splits audited");
  return o;
}

// ---------------------------------------------------------------- 6

double mean_auc(const MetricTable& t, const std::string& model) {
  for (const auto& r : t.rows)
    if (r.model == model) return r.cells[static_cast<std::size_t>(Metric::roc_auc)].mean;
  throw Error(Errc::InvalidConfig, "model missing from table: " + model);
}

Outcome criterion6(const std::optional<std::filesystem::path>& out) {
  Outcome o;
  const RunConfig cfg = config_file("desk.json");
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_experiment(cfg, out, RunLog(&std::cerr));
  const double secs = seconds_since(t0);
  const double ts = mean_auc(r.table, "fcn-ts");
  const double tsm = mean_auc(r.table, "fcn-tsm");
  const double ens = mean_auc(r.table, "soft-ensemble");
  double best = 0.0;
  for (const auto& m : ensemble_members()) best = std::max(best, mean_auc(r.table, m));
  o.require(tsm - ts >= 0.05, "FCN-TSM - FCN-TS = " + fmt(tsm - ts) + " < 0.05");
  o.require(ens >= best - 0.02, "ensemble " + fmt(ens) + " < best member " + fmt(best) + " - 0.02");
  o.require(ens >= 0.90, "ensemble AUC " + fmt(ens) + " < 0.90");
  o.note("fcn-ts " + fmt(ts) + ", fcn-tsm " + fmt(tsm) + ", ensemble " + fmt(ens) +
         ", best member " + fmt(best) + ", wall " + fmt(secs, 0) + " s on " +
         std::to_string(thread_count()) + " thread(s)");
  return o;
}

// ---------------------------------------------------------------- 7

Outcome criterion7(const std::optional<std::filesystem::path>& out) {
  Outcome o;
  const RunConfig cfg = config_file("null.json");
  o.require(cfg.generator.soz_amp_gain == 1.0 && cfg.generator.soz_meta_shift == 0.0,
            "null config must switch the signal off");
  const RunResult r = run_experiment(cfg, out, RunLog(&std::cerr));
  const std::size_t records = generate(cfg.generator).size() - r.rejections.size();
  o.require(records >= 2000, "only " + std::to_string(records) + " records");
  std::string aucs;
  for (const auto& row : r.table.rows) {
    const double auc = row.cells[static_cast<std::size_t>(Metric::roc_auc)].mean;
    o.require(std::abs(auc - 0.5) <= 0.05, row.model + " AUC " + fmt(auc));
    aucs += (aucs.empty() ? "" : ", ") + row.model + " " + fmt(auc, 3);
  }
  o.note(std::to_string(records) + " records; " + aucs);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  Outcome o;
  const RunConfig cfg = config_file("smoke.json");
  const auto a = fixture::temp_dir("acceptance_det_a");
  const auto b = fixture::temp_dir("acceptance_det_b");
  run_experiment(cfg, a, RunLog(nullptr));
  run_experiment(cfg, b, RunLog(nullptr));
  for (const char* f : {"results.csv", "table1.md"}) {
    const std::string x = slurp(a / f);
    o.require(!x.empty() && x == slurp(b / f), std::string(f) + " differs between runs");
  }
  o.note(std::to_string(cfg.models.size()) + " models, " + std::to_string(thread_count()) +
         " thread(s)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soz acceptance criteria"};
  int criterion = 0;
  std::string configs = SOZ_CONFIG_DIR;
  std::string out;
  app.add_option("--criterion", criterion, "Criterion number (1-8)")->required()->check(CLI::Range(1, 8));
  app.add_option("--configs", configs, "Directory holding desk.json, null.json, smoke.json");
  app.add_option("--out-dir", out, "Keep run artifacts of criteria 6 and 7 here");
  CLI11_PARSE(app, argc, argv);
  config_dir = configs;
  const std::optional<std::filesystem::path> out_dir =
      out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);

  const std::map<int, std::function<Outcome()>> checks = {
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, [&] { return criterion6(out_dir); }},
      {7, [&] { return criterion7(out_dir); }},
      {8, criterion8},
  };
  Outcome result;
  try {
    result = checks.at(criterion)();
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  std::cout << "criterion " << criterion << ": " << (result.pass ? "PASS" : "FAIL") << " ("
            << result.detail << ")" << std::endl;
  return result.pass ? 0 : 1;
}
