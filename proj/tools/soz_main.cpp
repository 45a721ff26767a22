// soz: generate synthetic CCEP cohorts, run the classification pipeline and
// render result tables.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "soz/config.hpp"
#include "soz/dataset.hpp"
#include "soz/error.hpp"
#include "soz/parallel.hpp"
#include "soz/pipeline.hpp"
#include "soz/report.hpp"
#include "soz/synthgen.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int cmd_generate(const std::string& config_path, const std::string& out) {
  const soz::RunConfig cfg = soz::load_config(config_path);
  const soz::RunLog log(&std::cerr);
  const soz::Cohort cohort = soz::generate(cfg.generator);
  soz::write_csv(cohort, std::filesystem::path(out));
  log.event({"generate", {}, {}}, "records=" + std::to_string(cohort.size()) + " out=" + out);
  return 0;
}

struct RunOverrides {
  std::optional<double> smoothing_m;
  std::optional<double> sat_threshold;
  std::optional<double> flat_eps;
  std::optional<std::size_t> smote_k;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const std::string& config_path, const std::string& data, const std::string& out_dir,
            const RunOverrides& o) {
  soz::RunConfig cfg = soz::load_config(config_path);
  if (!data.empty()) cfg.data = data;
  if (o.smoothing_m) cfg.pipeline.smoothing_m = *o.smoothing_m;
  if (o.sat_threshold) cfg.pipeline.sat_threshold = *o.sat_threshold;
  if (o.flat_eps) cfg.pipeline.flat_eps = *o.flat_eps;
  if (o.smote_k) cfg.pipeline.smote_k = *o.smote_k;
  if (o.seed) cfg.seed = *o.seed;
  std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.out_dir.value_or(""))
                                              : std::filesystem::path(out_dir);
  if (dir.empty()) throw soz::Error(soz::Errc::InvalidConfig, "no output directory (--out-dir)");
  const soz::RunLog log(&std::cerr);
  const soz::RunResult r = soz::run_experiment(cfg, dir, log);
  std::cout << soz::render_markdown(r.table);
  return 0;
}

int cmd_report(const std::string& results, const std::string& format) {
  const auto table = soz::aggregate(soz::read_results_csv(std::filesystem::path(results)));
  std::cout << (format == "csv" ? soz::render_csv(table) : soz::render_markdown(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seizure-onset-zone classification on CCEP recordings"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker thread cap (overrides SOZ_THREADS)");

  std::string config_path;
  std::string out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic raw cohort as CSV");
  gen->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output CSV path")->required();

  std::string data;
  std::string out_dir;
  RunOverrides overrides;
  auto* run = app.add_subcommand("run", "Run the full pipeline over every split");
  run->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
  run->add_option("--data", data, "Raw cohort CSV (default: generate from the config)");
  run->add_option("--out-dir", out_dir, "Directory for results.csv, table1.md, ...");
  run->add_option("--smoothing-m", overrides.smoothing_m, "Target-encoding smoothing m");
  run->add_option("--sat-threshold", overrides.sat_threshold, "Saturation threshold in µV");
  run->add_option("--flat-eps", overrides.flat_eps, "Flatline variance threshold");
  run->add_option("--smote-k", overrides.smote_k, "SMOTE neighbour count");
  run->add_option("--seed", overrides.seed, "Run seed");

  std::string results;
  std::string format = "md";
  auto* report = app.add_subcommand("report", "Aggregate a results.csv into a table");
  report->add_option("--results", results, "results.csv from a run")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (threads) soz::set_thread_count(*threads);
    if (*gen) return cmd_generate(config_path, out);
    if (*run) return cmd_run(config_path, data, out_dir, overrides);
    return cmd_report(results, format);
  } catch (const soz::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return soz::is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
