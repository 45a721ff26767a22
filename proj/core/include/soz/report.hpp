#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace soz {

enum class Metric { macro_precision, macro_recall, roc_auc, accuracy };
inline constexpr std::array<Metric, 4> kMetrics = {Metric::macro_precision, Metric::macro_recall,
                                                    Metric::roc_auc, Metric::accuracy};

/// Key used in results.csv ("macro_precision", ...).
std::string_view metric_key(Metric m) noexcept;
/// Column title in the summary table ("Macro Precision", ...).
std::string_view metric_title(Metric m) noexcept;
Metric parse_metric(std::string_view key);

/// Table label for a CLI model name ("gbdt-x" -> "GBDT-X"); unknown names pass through.
std::string display_name(std::string_view model);

struct SplitResult {
  std::string model;
  std::size_t split = 0;
  std::array<double, 4> values{};  // indexed like kMetrics, each in [0, 1]

  double get(Metric m) const noexcept { return values[static_cast<std::size_t>(m)]; }
  bool operator==(const SplitResult&) const = default;
};

struct MetricCell {
  double mean = 0.0;  // 0-1 scale
  double std = 0.0;   // sample standard deviation
};

struct MetricRow {
  std::string model;
  std::array<MetricCell, 4> cells{};
};

struct MetricTable {
  std::size_t n_splits = 0;
  std::vector<MetricRow> rows;  // models in first-seen order
};

/// Mean and sample standard deviation per (model, metric).
MetricTable aggregate(const std::vector<SplitResult>& results);

/// "mm.m ±s.ss" on a 0-100 scale.
std::string format_cell(const MetricCell& cell);
/// Inverse of format_cell on the display scale: "85.0 ±7.07" -> {85.0, 7.07}.
std::pair<double, double> parse_cell(std::string_view text);

std::string render_markdown(const MetricTable& table);
std::string render_csv(const MetricTable& table);
/// Reads the model rows of a rendered markdown table (display scale / 100).
MetricTable parse_markdown(std::string_view text);

/// Long form: model,split,metric,value.
void write_results_csv(const std::vector<SplitResult>& results, std::ostream& out);
void write_results_csv(const std::vector<SplitResult>& results, const std::filesystem::path& path);
std::vector<SplitResult> read_results_csv(std::istream& in);
std::vector<SplitResult> read_results_csv(const std::filesystem::path& path);

}  // namespace soz
