#include "soz/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "soz/dataset.hpp"
#include "soz/error.hpp"

namespace soz {

namespace {

constexpr std::string_view kPlusMinus = "±";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, const std::string& context) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::ParseError, context + ": cannot parse '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string_view metric_key(Metric m) noexcept {
  switch (m) {
    case Metric::macro_precision: return "macro_precision";
    case Metric::macro_recall: return "macro_recall";
    case Metric::roc_auc: return "roc_auc";
    case Metric::accuracy: return "accuracy";
  }
  return "";
}

std::string_view metric_title(Metric m) noexcept {
  switch (m) {
    case Metric::macro_precision: return "Macro Precision";
    case Metric::macro_recall: return "Macro Recall";
    case Metric::roc_auc: return "ROC AUC";
    case Metric::accuracy: return "Accuracy";
  }
  return "";
}

Metric parse_metric(std::string_view key) {
  for (Metric m : kMetrics) {
    if (metric_key(m) == key) return m;
  }
  throw Error(Errc::BadEnum, "unknown metric '" + std::string(key) + "'");
}

std::string display_name(std::string_view model) {
  static const std::map<std::string_view, std::string_view> names = {
      {"knn-dtw", "KNN"},         {"fcn-ts", "FCN-TS"},
      {"fcn-tsm", "FCN-TSM"},     {"svm-poly", "SVM-Poly"},
      {"svm-rbf", "SVM-Rbf"},     {"rf", "Random Forest"},
      {"extra-trees", "Extra Trees"}, {"gbdt-x", "GBDT-X"},
      {"gbdt-c", "GBDT-C"},       {"soft-ensemble", "Soft Ensemble"},
  };
  const auto it = names.find(model);
  return std::string(it != names.end() ? it->second : model);
}

MetricTable aggregate(const std::vector<SplitResult>& results) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SplitResult*>> by_model;
  for (const auto& r : results) {
    auto& v = by_model[r.model];
    if (v.empty()) order.push_back(r.model);
    v.push_back(&r);
  }
  MetricTable table;
  if (order.empty()) return table;
  table.n_splits = by_model[order.front()].size();
  for (const auto& name : order) {
    const auto& v = by_model[name];
    if (v.size() != table.n_splits) {
      throw Error(Errc::UnevenSplits, "model " + name + " has " + std::to_string(v.size()) +
                                          " splits, expected " + std::to_string(table.n_splits));
    }
  }
  if (table.n_splits < 2) throw Error(Errc::UnevenSplits, "need at least 2 splits per model");
  for (const auto& name : order) {
    const auto& v = by_model[name];
    MetricRow row;
    row.model = name;
    const double n = static_cast<double>(v.size());
    for (std::size_t k = 0; k < kMetrics.size(); ++k) {
      double sum = 0.0;
      for (const auto* r : v) sum += r->values[k];
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto* r : v) ss += (r->values[k] - mean) * (r->values[k] - mean);
      row.cells[k] = {mean, std::sqrt(ss / (n - 1.0))};
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_cell(const MetricCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f %s%.2f", 100.0 * cell.mean, "±", 100.0 * cell.std);
  return buf;
}

std::pair<double, double> parse_cell(std::string_view text) {
  text = trim(text);
  const std::size_t pm = text.find(kPlusMinus);
  if (pm == std::string_view::npos) {
    throw Error(Errc::ParseError, "table cell '" + std::string(text) + "' lacks a ± part");
  }
  return {to_double(text.substr(0, pm), "table cell"),
          to_double(text.substr(pm + kPlusMinus.size()), "table cell")};
}

std::string render_markdown(const MetricTable& table) {
  std::ostringstream out;
  out << "| Model |";
  for (Metric m : kMetrics) out << ' ' << metric_title(m) << " |";
  out << "\n|---|";
  for (std::size_t k = 0; k < kMetrics.size(); ++k) out << "---|";
  out << '\n';
  for (const auto& row : table.rows) {
    out << "| " << display_name(row.model) << " |";
    for (const auto& c : row.cells) out << ' ' << format_cell(c) << " |";
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const MetricTable& table) {
  std::ostringstream out;
  out << "Model";
  for (Metric m : kMetrics) out << ',' << metric_title(m);
  out << '\n';
  for (const auto& row : table.rows) {
    out << display_name(row.model);
    for (const auto& c : row.cells) out << ',' << format_cell(c);
    out << '\n';
  }
  return out.str();
}

MetricTable parse_markdown(std::string_view text) {
  MetricTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view s = trim(line);
    if (s.empty() || s.find(kPlusMinus) == std::string_view::npos) continue;
    if (s.front() == '|') s.remove_prefix(1);
    if (!s.empty() && s.back() == '|') s.remove_suffix(1);
    const auto fields = split(s, '|');
    if (fields.size() != 1 + kMetrics.size()) {
      throw Error(Errc::ParseError, "table row has " + std::to_string(fields.size()) + " fields");
    }
    MetricRow row;
    row.model = std::string(trim(fields[0]));
    for (std::size_t k = 0; k < kMetrics.size(); ++k) {
      const auto [mean, sd] = parse_cell(fields[k + 1]);
      row.cells[k] = {mean / 100.0, sd / 100.0};
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_results_csv(const std::vector<SplitResult>& results, std::ostream& out) {
  out << "model,split,metric,value\n";
  for (const auto& r : results) {
    for (std::size_t k = 0; k < kMetrics.size(); ++k) {
      out << r.model << ',' << r.split << ',' << metric_key(kMetrics[k]) << ','
          << format_shortest(r.values[k]) << '\n';
    }
  }
}

void write_results_csv(const std::vector<SplitResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  write_results_csv(results, out);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::vector<SplitResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "model,split,metric,value") {
    throw Error(Errc::MissingColumn, "results header must be model,split,metric,value");
  }
  std::vector<SplitResult> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> index;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    const std::string ctx = "results row " + std::to_string(row);
    if (f.size() != 4) throw Error(Errc::LengthMismatch, ctx + ": expected 4 fields");
    const std::string model(f[0]);
    const double split_d = to_double(f[1], ctx);
    if (split_d < 0 || split_d != std::floor(split_d)) throw Error(Errc::ParseError, ctx + ": bad split");
    const auto sp = static_cast<std::size_t>(split_d);
    const Metric m = parse_metric(f[2]);
    const double v = to_double(f[3], ctx);
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, ctx);
    const auto key = std::make_pair(model, sp);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(SplitResult{model, sp, {}});
    }
    out[it->second].values[static_cast<std::size_t>(m)] = v;
  }
  return out;
}

std::vector<SplitResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  return read_results_csv(in);
}

}  // namespace soz
