#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "soz/error.hpp"
#include "soz/metrics.hpp"
#include "soz/report.hpp"

using namespace soz;

TEST(Confusion, HandCounts) {
  const std::vector<int> t = {1, 1, 0, 0};
  const std::vector<int> p = {1, 0, 0, 0};
  const auto m = confusion_metrics(t, p);
  EXPECT_DOUBLE_EQ(m.macro_precision, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.macro_recall, 0.75);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
}

TEST(Confusion, PerfectAndDegenerate) {
  const std::vector<int> t = {1, 0, 1, 0, 0};
  const auto m = confusion_metrics(t, t);
  EXPECT_EQ(m.macro_precision, 1.0);
  EXPECT_EQ(m.macro_recall, 1.0);
  EXPECT_EQ(m.accuracy, 1.0);
  const std::vector<int> zeros(5, 0);
  const auto z = confusion_metrics(t, zeros);
  // precision_1 = 0/0 -> 0; precision_0 = 3/5
  EXPECT_DOUBLE_EQ(z.macro_precision, 0.3);
  EXPECT_DOUBLE_EQ(z.macro_recall, 0.5);
  const std::vector<int> short_pred = {1};
  try {
    confusion_metrics(t, short_pred);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(Auc, SpecExampleAndEdges) {
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.9, 0.8, 0.7, 0.1}),
                   0.75);
  EXPECT_EQ(roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<int>{0, 1, 1, 0}, std::vector<double>{3, 3, 3, 3}), 0.5);
  try {
    roc_auc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingleClass);
  }
}

TEST(Auc, MatchesPairCountingWithTies) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % 2);
      s[i] = static_cast<double>(rng() % 7) / 7.0;
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(roc_auc(y, s), oracle::auc_pairs(y, s));
  }
}

TEST(Auc, ComplementAndMonotoneInvariance) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> z(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> y(50);
    std::vector<double> s(50);
    std::vector<double> neg(50);
    std::vector<double> warped(50);
    for (std::size_t i = 0; i < 50; ++i) {
      y[i] = static_cast<int>(i % 3 == 0);
      s[i] = z(rng);
      neg[i] = -s[i];
      warped[i] = std::exp(3 * s[i]) + 1;
    }
    EXPECT_NEAR(roc_auc(y, s) + roc_auc(y, neg), 1.0, 1e-12);
    EXPECT_EQ(roc_auc(y, s), roc_auc(y, warped));
  }
}

TEST(Ensemble, MeanTieRuleAndPermutation) {
  ProbaMatrix a(2), b(2), c(2), d(2);
  a.set_positive(0, 0.0);
  b.set_positive(0, 0.0);
  c.set_positive(0, 1.0);
  d.set_positive(0, 1.0);
  a.set_positive(1, 0.1);
  b.set_positive(1, 0.7);
  c.set_positive(1, 0.35);
  d.set_positive(1, 0.9);
  const ProbaMatrix e = soft_ensemble({a, b, c, d});
  EXPECT_EQ(e(0, 0), 0.5);
  EXPECT_EQ(e(0, 1), 0.5);
  EXPECT_EQ(argmax_labels(e)[0], 0);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(e(i, 0) + e(i, 1), 1.0, 1e-12);
  EXPECT_EQ(soft_ensemble({d, c, b, a}), e);
  EXPECT_EQ(soft_ensemble({b, d, a, c}), e);
  EXPECT_EQ(soft_ensemble({b, b, b, b}), b);
  try {
    soft_ensemble({a, ProbaMatrix(3)});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::ShapeMismatch);
  }
}

TEST(Report, AggregateSampleStd) {
  std::vector<SplitResult> r = {{"rf", 0, {0.8, 0.8, 0.8, 0.8}}, {"rf", 1, {0.9, 0.8, 0.9, 0.8}}};
  const MetricTable t = aggregate(r);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.n_splits, 2u);
  EXPECT_NEAR(t.rows[0].cells[0].mean, 0.85, 1e-15);
  EXPECT_NEAR(t.rows[0].cells[0].std, 0.0707106781186548, 1e-12);
  EXPECT_EQ(t.rows[0].cells[1].std, 0.0);
  EXPECT_EQ(format_cell(t.rows[0].cells[0]), "85.0 ±7.07");
  EXPECT_EQ(format_cell(t.rows[0].cells[1]), "80.0 ±0.00");
}

TEST(Report, UnevenSplitsRejected) {
  std::vector<SplitResult> r = {{"rf", 0, {}}, {"rf", 1, {}}, {"svm-rbf", 0, {}}};
  try {
    aggregate(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnevenSplits);
  }
  try {
    aggregate({{"rf", 0, {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnevenSplits);
  }
}

TEST(Report, ParsesThePublishedRow) {
  const std::string md =
      "| Model | Macro Precision | Macro Recall | ROC AUC | Accuracy |\n"
      "|---|---|---|---|---|\n"
      "| Soft Ensemble | 68.2 ±1.56 | 76.3 ±1.83 | 83.2 ±1.99 | 87.7 ±1.79 |\n";
  const MetricTable t = parse_markdown(md);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].model, "Soft Ensemble");
  const double expect[4][2] = {{68.2, 1.56}, {76.3, 1.83}, {83.2, 1.99}, {87.7, 1.79}};
  const char* cells[4] = {"68.2 ±1.56", "76.3 ±1.83", "83.2 ±1.99", "87.7 ±1.79"};
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_NEAR(t.rows[0].cells[m].mean * 100, expect[m][0], 1e-9);
    EXPECT_NEAR(t.rows[0].cells[m].std * 100, expect[m][1], 1e-9);
    EXPECT_EQ(format_cell(t.rows[0].cells[m]), cells[m]);
  }
  EXPECT_EQ(parse_cell("85.0 ±7.07"), std::make_pair(85.0, 7.07));
}

TEST(Report, RenderParseRoundTrip) {
  std::vector<SplitResult> r;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (const char* m : {"knn-dtw", "rf", "soft-ensemble"})
    for (std::size_t s = 0; s < 7; ++s) r.push_back({m, s, {u(rng), u(rng), u(rng), u(rng)}});
  const MetricTable t = aggregate(r);
  const std::string md = render_markdown(t);
  EXPECT_NE(md.find("| Model | Macro Precision | Macro Recall | ROC AUC | Accuracy |"),
            std::string::npos);
  EXPECT_NE(md.find("| Soft Ensemble |"), std::string::npos);
  EXPECT_NE(md.find("| KNN |"), std::string::npos);
  const MetricTable back = parse_markdown(md);
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t m = 0; m < 4; ++m) {
      EXPECT_NEAR(back.rows[i].cells[m].mean, t.rows[i].cells[m].mean, 0.0005 + 1e-12);
      EXPECT_NEAR(back.rows[i].cells[m].std, t.rows[i].cells[m].std, 0.00005 + 1e-12);
    }
  EXPECT_NE(render_csv(t).find("Soft Ensemble"), std::string::npos);
}

TEST(Report, ResultsCsvRoundTrip) {
  std::vector<SplitResult> r = {{"rf", 0, {0.1, 0.2, 0.30000000000000004, 1.0 / 3.0}},
                                {"gbdt-c", 1, {0.5, 0.25, 0.125, 0.0}}};
  std::stringstream io;
  write_results_csv(r, io);
  EXPECT_EQ(io.str().substr(0, io.str().find('\n')), "model,split,metric,value");
  EXPECT_EQ(read_results_csv(io), r);
}

TEST(Report, MetricNames) {
  for (Metric m : kMetrics) EXPECT_EQ(parse_metric(metric_key(m)), m);
  EXPECT_EQ(metric_title(Metric::roc_auc), "ROC AUC");
  EXPECT_EQ(display_name("gbdt-x"), "GBDT-X");
  EXPECT_EQ(display_name("whatever"), "whatever");
}
