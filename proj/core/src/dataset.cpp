#include "soz/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "soz/error.hpp"

namespace soz {

namespace {

constexpr std::string_view kCategoricalNames[] = {
    "stim_electrode_id", "rec_electrode_id", "stim_region", "rec_region", "tissue_type",
    "hemisphere"};

std::string row_context(std::size_t row, std::string_view col) {
  return "row " + std::to_string(row) + ", column " + std::string(col);
}

void check_identifier(std::string_view s, std::size_t row, std::string_view col) {
  if (s.find_first_of(",\"\r\n") != std::string_view::npos) {
    throw Error(Errc::ParseError, row_context(row, col) + ": identifier contains a delimiter");
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::size_t row, std::string_view col) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw Error(Errc::NonFiniteValue, row_context(row, col) + ": '" + std::string(field) + "'");
  }
  if (ec != std::errc() || ptr != last) {
    throw Error(Errc::ParseError, row_context(row, col) + ": '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(Errc::NonFiniteValue, row_context(row, col) + ": '" + std::string(field) + "'");
  }
  return value;
}

TissueType parse_tissue(std::string_view s, std::size_t row) {
  if (s == "gray") return TissueType::gray;
  if (s == "white") return TissueType::white;
  throw Error(Errc::BadEnum, row_context(row, "tissue_type") + ": '" + std::string(s) + "'");
}

Hemisphere parse_hemisphere(std::string_view s, std::size_t row) {
  if (s == "left") return Hemisphere::left;
  if (s == "right") return Hemisphere::right;
  throw Error(Errc::BadEnum, row_context(row, "hemisphere") + ": '" + std::string(s) + "'");
}

template <class T>
void append_shortest(std::string& out, T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::string_view to_string(TissueType t) noexcept { return t == TissueType::gray ? "gray" : "white"; }
std::string_view to_string(Hemisphere h) noexcept { return h == Hemisphere::left ? "left" : "right"; }
std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::raw: return "raw";
    case Stage::cleaned: return "cleaned";
    case Stage::encoded: return "encoded";
  }
  return "?";
}

std::size_t series_length(Stage stage) noexcept {
  return stage == Stage::raw ? kRawLength : kTrimmedLength;
}

const CategoricalMeta& CcepRecord::categorical() const {
  if (const auto* m = std::get_if<CategoricalMeta>(&meta)) return *m;
  throw Error(Errc::WrongStage, "record metadata is already target-encoded");
}

const EncodedMeta& CcepRecord::encoded() const {
  if (const auto* m = std::get_if<EncodedMeta>(&meta)) return *m;
  throw Error(Errc::WrongStage, "record metadata is not encoded");
}

Cohort::Cohort(Stage stage, std::vector<CcepRecord> records)
    : stage_(stage), records_(std::move(records)) {
  const std::size_t expected = series_length(stage);
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const CcepRecord& rec = records_[r];
    if (rec.series.size() != expected) {
      throw Error(Errc::LengthMismatch, "row " + std::to_string(r) + ": series has " +
                                            std::to_string(rec.series.size()) +
                                            " samples, stage " + std::string(to_string(stage)) +
                                            " requires " + std::to_string(expected));
    }
    if (rec.soz != 0 && rec.soz != 1) {
      throw Error(Errc::BadEnum, row_context(r, "soz") + ": label must be 0 or 1");
    }
    if (rec.is_encoded() != (stage == Stage::encoded)) {
      throw Error(Errc::WrongStage, "row " + std::to_string(r) + ": metadata form does not match stage " +
                                        std::string(to_string(stage)));
    }
    if (!std::isfinite(rec.stim_amplitude)) {
      throw Error(Errc::NonFiniteValue, row_context(r, "stim_amplitude"));
    }
    for (std::size_t t = 0; t < rec.series.size(); ++t) {
      if (!std::isfinite(rec.series[t])) {
        throw Error(Errc::NonFiniteValue, row_context(r, series_column_name(t)));
      }
    }
    if (const auto* e = std::get_if<EncodedMeta>(&rec.meta)) {
      for (double v : {e->stim_electrode_id, e->rec_electrode_id, e->stim_region, e->rec_region,
                       e->tissue_type, e->hemisphere}) {
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, row_context(r, "encoded metadata"));
      }
    }
    patients_.insert(rec.patient_id);
  }
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::vector<double> values,
                             std::vector<int> labels, std::vector<std::string> patient_keys,
                             std::vector<RowOrigin> origins)
    : column_names_(std::move(column_names)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      patient_keys_(std::move(patient_keys)),
      origins_(std::move(origins)) {
  const std::size_t n = labels_.size();
  if (patient_keys_.size() != n) {
    throw Error(Errc::ShapeMismatch, "patient key count differs from label count");
  }
  if (values_.size() != n * column_names_.size()) {
    throw Error(Errc::ShapeMismatch, "value count is not rows x columns");
  }
  if (origins_.empty()) {
    origins_.resize(n);
    for (std::size_t i = 0; i < n; ++i) origins_[i].source_row = static_cast<std::int64_t>(i);
  } else if (origins_.size() != n) {
    throw Error(Errc::ShapeMismatch, "origin count differs from label count");
  }
  for (int y : labels_) {
    if (y != 0 && y != 1) throw Error(Errc::BadEnum, "labels must be 0 or 1");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw Error(Errc::NonFiniteValue,
                  row_context(k / column_names_.size(), column_names_[k % column_names_.size()]));
    }
  }
  while (series_columns_ < column_names_.size()) {
    const std::string& name = column_names_[series_columns_];
    if (name.size() < 2 || name[0] != 't' ||
        name.find_first_not_of("0123456789", 1) != std::string::npos) {
      break;
    }
    ++series_columns_;
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  const std::size_t d = cols();
  std::vector<double> values;
  values.reserve(indices.size() * d);
  std::vector<int> labels;
  std::vector<std::string> keys;
  std::vector<RowOrigin> origins;
  labels.reserve(indices.size());
  keys.reserve(indices.size());
  origins.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
    keys.push_back(patient_keys_[i]);
    origins.push_back(origins_[i]);
  }
  return FeatureMatrix(column_names_, std::move(values), std::move(labels), std::move(keys),
                       std::move(origins));
}

FeatureMatrix FeatureMatrix::leading_columns(std::size_t count) const {
  if (count > cols()) throw Error(Errc::ShapeMismatch, "requested more columns than present");
  std::vector<double> values;
  values.reserve(rows() * count);
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto r = row(i);
    values.insert(values.end(), r.begin(), r.begin() + static_cast<std::ptrdiff_t>(count));
  }
  std::vector<std::string> names(column_names_.begin(),
                                 column_names_.begin() + static_cast<std::ptrdiff_t>(count));
  return FeatureMatrix(std::move(names), std::move(values), labels_, patient_keys_, origins_);
}

std::string series_column_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%03zu", i);
  return buf;
}

std::vector<std::string> csv_header(Stage stage) {
  const bool enc = stage == Stage::encoded;
  auto cat = [enc](std::string_view name) {
    return enc ? std::string(name) + "_enc" : std::string(name);
  };
  std::vector<std::string> h = {"patient_id",       cat("stim_electrode_id"), cat("rec_electrode_id"),
                                "stim_amplitude",   cat("stim_region"),       cat("rec_region"),
                                cat("tissue_type"), cat("hemisphere")};
  for (std::size_t t = 0; t < series_length(stage); ++t) h.push_back(series_column_name(t));
  h.emplace_back("soz");
  return h;
}

std::vector<std::string> design_columns(bool include_metadata) {
  std::vector<std::string> names;
  names.reserve(kFullDesignColumns);
  for (std::size_t t = 0; t < kTrimmedLength; ++t) names.push_back(series_column_name(t));
  if (include_metadata) {
    names.emplace_back("stim_amplitude");
    names.emplace_back("stim_region_enc");
    names.emplace_back("rec_region_enc");
    names.emplace_back("tissue_type_enc");
    names.emplace_back("hemisphere_enc");
    names.emplace_back("stim_electrode_id_enc");
    names.emplace_back("rec_electrode_id_enc");
  }
  return names;
}

Cohort read_csv(std::istream& in, Stage stage) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string_view rest(text);

  auto next_line = [&rest](std::string_view& line) {
    if (rest.empty()) return false;
    const std::size_t nl = rest.find('\n');
    line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  };

  const std::vector<std::string> expected = csv_header(stage);
  std::string_view line;
  if (!next_line(line)) throw Error(Errc::MissingColumn, "empty file: no header");
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (c >= header.size() || header[c] != expected[c]) {
      throw Error(Errc::MissingColumn, "expected column '" + expected[c] + "' at position " +
                                           std::to_string(c) + " for stage " +
                                           std::string(to_string(stage)));
    }
  }
  if (header.size() != expected.size()) {
    throw Error(Errc::MissingColumn, "header has " + std::to_string(header.size()) +
                                         " columns, expected " + std::to_string(expected.size()));
  }

  const std::size_t len = series_length(stage);
  const std::size_t series_start = 8;
  std::vector<CcepRecord> records;
  std::size_t row = 0;
  while (next_line(line)) {
    if (line.empty() && rest.empty()) break;  // trailing newline
    const auto f = split_fields(line);
    if (f.size() != expected.size()) {
      throw Error(Errc::LengthMismatch, "row " + std::to_string(row) + ": " +
                                            std::to_string(f.size()) + " fields, expected " +
                                            std::to_string(expected.size()));
    }
    CcepRecord rec;
    rec.patient_id = std::string(f[0]);
    rec.stim_amplitude = parse_number<double>(f[3], row, expected[3]);
    if (stage == Stage::encoded) {
      EncodedMeta m;
      m.stim_electrode_id = parse_number<double>(f[1], row, expected[1]);
      m.rec_electrode_id = parse_number<double>(f[2], row, expected[2]);
      m.stim_region = parse_number<double>(f[4], row, expected[4]);
      m.rec_region = parse_number<double>(f[5], row, expected[5]);
      m.tissue_type = parse_number<double>(f[6], row, expected[6]);
      m.hemisphere = parse_number<double>(f[7], row, expected[7]);
      rec.meta = m;
    } else {
      CategoricalMeta m;
      m.stim_electrode_id = std::string(f[1]);
      m.rec_electrode_id = std::string(f[2]);
      m.stim_region = std::string(f[4]);
      m.rec_region = std::string(f[5]);
      m.tissue_type = parse_tissue(f[6], row);
      m.hemisphere = parse_hemisphere(f[7], row);
      rec.meta = std::move(m);
    }
    rec.series.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
      rec.series[t] = parse_number<float>(f[series_start + t], row, expected[series_start + t]);
    }
    const std::string_view label = f.back();
    if (label == "0") {
      rec.soz = 0;
    } else if (label == "1") {
      rec.soz = 1;
    } else {
      throw Error(Errc::BadEnum, row_context(row, "soz") + ": '" + std::string(label) + "'");
    }
    records.push_back(std::move(rec));
    ++row;
  }
  return Cohort(stage, std::move(records));
}

Cohort load_csv(const std::filesystem::path& path, Stage stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return read_csv(in, stage);
}

void write_csv(const Cohort& cohort, std::ostream& out) {
  if (cohort.empty()) throw Error(Errc::EmptyInput, "refusing to write an empty cohort");
  const auto header = csv_header(cohort.stage());
  std::string buf;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) buf.push_back(',');
    buf += header[c];
  }
  buf.push_back('\n');
  out << buf;

  std::size_t row = 0;
  for (const CcepRecord& rec : cohort.records()) {
    buf.clear();
    check_identifier(rec.patient_id, row, "patient_id");
    buf += rec.patient_id;
    buf.push_back(',');
    if (const auto* e = std::get_if<EncodedMeta>(&rec.meta)) {
      append_shortest(buf, e->stim_electrode_id);
      buf.push_back(',');
      append_shortest(buf, e->rec_electrode_id);
      buf.push_back(',');
      append_shortest(buf, rec.stim_amplitude);
      buf.push_back(',');
      append_shortest(buf, e->stim_region);
      buf.push_back(',');
      append_shortest(buf, e->rec_region);
      buf.push_back(',');
      append_shortest(buf, e->tissue_type);
      buf.push_back(',');
      append_shortest(buf, e->hemisphere);
    } else {
      const auto& m = std::get<CategoricalMeta>(rec.meta);
      for (const auto& [value, name] :
           {std::pair{&m.stim_electrode_id, kCategoricalNames[0]},
            std::pair{&m.rec_electrode_id, kCategoricalNames[1]},
            std::pair{&m.stim_region, kCategoricalNames[2]},
            std::pair{&m.rec_region, kCategoricalNames[3]}}) {
        check_identifier(*value, row, name);
      }
      buf += m.stim_electrode_id;
      buf.push_back(',');
      buf += m.rec_electrode_id;
      buf.push_back(',');
      append_shortest(buf, rec.stim_amplitude);
      buf.push_back(',');
      buf += m.stim_region;
      buf.push_back(',');
      buf += m.rec_region;
      buf.push_back(',');
      buf += to_string(m.tissue_type);
      buf.push_back(',');
      buf += to_string(m.hemisphere);
    }
    for (float v : rec.series) {
      buf.push_back(',');
      append_shortest(buf, v);
    }
    buf.push_back(',');
    buf.push_back(rec.soz ? '1' : '0');
    buf.push_back('\n');
    out << buf;
    ++row;
  }
  if (!out) throw Error(Errc::IoFailure, "write failed");
}

void write_csv(const Cohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  write_csv(cohort, out);
  out.flush();
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

FeatureMatrix to_matrix(const Cohort& cohort, bool include_metadata) {
  if (cohort.stage() != Stage::encoded) {
    throw Error(Errc::WrongStage, "to_matrix needs an encoded cohort, got " +
                                      std::string(to_string(cohort.stage())));
  }
  auto names = design_columns(include_metadata);
  const std::size_t d = names.size();
  const std::size_t n = cohort.size();
  std::vector<double> values(n * d);
  std::vector<int> labels(n);
  std::vector<std::string> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CcepRecord& rec = cohort.records()[i];
    double* out = values.data() + i * d;
    for (std::size_t t = 0; t < kTrimmedLength; ++t) out[t] = rec.series[t];
    if (include_metadata) {
      const EncodedMeta& m = rec.encoded();
      double* meta = out + kTrimmedLength;
      meta[0] = rec.stim_amplitude;
      meta[1] = m.stim_region;
      meta[2] = m.rec_region;
      meta[3] = m.tissue_type;
      meta[4] = m.hemisphere;
      meta[5] = m.stim_electrode_id;
      meta[6] = m.rec_electrode_id;
    }
    labels[i] = rec.soz;
    keys[i] = rec.patient_id;
  }
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels), std::move(keys));
}

std::string format_shortest(double v) {
  std::string s;
  append_shortest(s, v);
  return s;
}

std::string format_shortest(float v) {
  std::string s;
  append_shortest(s, v);
  return s;
}

}  // namespace soz
