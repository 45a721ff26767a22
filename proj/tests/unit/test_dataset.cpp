#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "soz/dataset.hpp"
#include "soz/error.hpp"
#include "soz/preprocess.hpp"
#include "soz/synthgen.hpp"

using namespace soz;

namespace {

Cohort small_raw() { return generate(fixture::small_gen(2, 3)); }

std::string to_text(const Cohort& c) {
  std::ostringstream out;
  write_csv(c, out);
  return out.str();
}

Errc read_error(const std::string& text, Stage stage) {
  std::istringstream in(text);
  try {
    read_csv(in, stage);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "read_csv accepted malformed input";
  return Errc::IoFailure;
}

}  // namespace

TEST(Dataset, HeaderLayout) {
  const auto raw = csv_header(Stage::raw);
  ASSERT_EQ(raw.size(), 8u + 500u + 1u);
  EXPECT_EQ(raw[0], "patient_id");
  EXPECT_EQ(raw[7], "hemisphere");
  EXPECT_EQ(raw[8], "t000");
  EXPECT_EQ(raw[507], "t499");
  EXPECT_EQ(raw.back(), "soz");
  EXPECT_EQ(csv_header(Stage::cleaned).size(), 8u + 495u + 1u);
  const auto enc = csv_header(Stage::encoded);
  EXPECT_NE(std::find(enc.begin(), enc.end(), "rec_region_enc"), enc.end());
}

TEST(Dataset, ThreeRowRoundTrip) {
  const Cohort c = small_raw();
  std::vector<CcepRecord> three(c.records().begin(), c.records().begin() + 3);
  const Cohort small(Stage::raw, three);
  std::istringstream in(to_text(small));
  const Cohort back = read_csv(in, Stage::raw);
  EXPECT_EQ(back.size(), 3u);
  EXPECT_EQ(back.stage(), Stage::raw);
  EXPECT_EQ(back, small);
}

TEST(Dataset, WriteLoadIsIdentityOnGeneratedCohort) {
  const Cohort c = small_raw();
  const std::string text = to_text(c);
  std::istringstream in(text);
  const Cohort back = read_csv(in, Stage::raw);
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_text(back), text);
}

TEST(Dataset, RoundTripThroughFileAndLaterStages) {
  const auto dir = fixture::temp_dir("dataset_rt");
  const Cohort cleaned = trim_artifact(small_raw());
  write_csv(cleaned, dir / "c.csv");
  EXPECT_EQ(load_csv(dir / "c.csv", Stage::cleaned), cleaned);

  const auto enc = apply_encoder(fit_encoder(cleaned, 20.0), cleaned);
  write_csv(enc, dir / "e.csv");
  EXPECT_EQ(load_csv(dir / "e.csv", Stage::encoded), enc);
}

TEST(Dataset, OneRecordGivesTwoLines) {
  const Cohort c = small_raw();
  const Cohort one(Stage::raw, {c.records().front()});
  const std::string text = to_text(one);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Dataset, EmptyCohortCannotBeWritten) {
  std::ostringstream out;
  EXPECT_THROW(write_csv(Cohort{}, out), Error);
}

TEST(Dataset, NanSampleIsRejectedWithColumn) {
  const Cohort c = small_raw();
  std::string text = to_text(Cohort(Stage::raw, {c.records().front()}));
  // Replace sample t012 (column 8 + 12) of the data row.
  const auto header_end = text.find('\n');
  std::size_t pos = header_end + 1;
  for (int commas = 0; commas < 8 + 12; ++pos)
    if (text[pos] == ',') ++commas;
  const auto end = text.find(',', pos);
  text.replace(pos, end - pos, "NaN");
  std::istringstream in(text);
  try {
    read_csv(in, Stage::raw);
    FAIL() << "NaN accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("t012"), std::string::npos) << e.what();
  }
}

TEST(Dataset, BadEnumMissingColumnAndShortRow) {
  const Cohort c = small_raw();
  const std::string good = to_text(Cohort(Stage::raw, {c.records().front()}));

  std::string bad_enum = good;
  const auto gray = bad_enum.find(",gray,") != std::string::npos ? bad_enum.find(",gray,")
                                                                  : bad_enum.find(",white,");
  ASSERT_NE(gray, std::string::npos);
  bad_enum.replace(gray, bad_enum.find(',', gray + 1) - gray, ",grey");
  EXPECT_EQ(read_error(bad_enum, Stage::raw), Errc::BadEnum);

  std::string no_col = good;
  no_col.replace(0, std::string("patient_id").size(), "patient");
  EXPECT_EQ(read_error(no_col, Stage::raw), Errc::MissingColumn);

  // A raw file read as cleaned has the wrong header width.
  EXPECT_EQ(read_error(good, Stage::cleaned), Errc::MissingColumn);

  std::string short_row = good;
  short_row.erase(short_row.rfind(','), std::string::npos);
  short_row += "\n";
  EXPECT_EQ(read_error(short_row, Stage::raw), Errc::LengthMismatch);
}

TEST(Dataset, RecordInvariantsEnforcedOnConstruction) {
  CcepRecord r = small_raw().records().front();
  r.series.resize(499);
  EXPECT_THROW(Cohort(Stage::raw, {r}), Error);
  r.series.resize(500, 0.0f);
  r.soz = 2;
  EXPECT_THROW(Cohort(Stage::raw, {r}), Error);
}

TEST(Dataset, ToMatrixWidths) {
  const Cohort cleaned = trim_artifact(small_raw());
  const Cohort enc = apply_encoder(fit_encoder(cleaned, 20.0), cleaned);
  const FeatureMatrix full = to_matrix(enc, true);
  const FeatureMatrix ts = to_matrix(enc, false);
  EXPECT_EQ(full.cols(), 502u);
  EXPECT_EQ(ts.cols(), 495u);
  EXPECT_EQ(full.series_columns(), 495u);
  EXPECT_EQ(full.rows(), enc.size());
  for (std::size_t i = 0; i < enc.size(); ++i) {
    EXPECT_EQ(full.labels()[i], enc.records()[i].soz);
    EXPECT_EQ(full.patient_keys()[i], enc.records()[i].patient_id);
  }
  EXPECT_EQ(full.column_names(), design_columns(true));
}

TEST(Dataset, ToMatrixRequiresEncodedStage) {
  const Cohort raw = small_raw();
  try {
    to_matrix(raw, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongStage);
  }
}

TEST(Dataset, ShortestFormattingRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 2000; ++i) {
    const double d = u(rng);
    const float f = static_cast<float>(u(rng));
    EXPECT_EQ(std::stod(format_shortest(d)), d);
    EXPECT_EQ(std::stof(format_shortest(f)), f);
  }
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(1.5f), "1.5");
}
