#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "soz/error.hpp"
#include "soz/knn_dtw.hpp"

using namespace soz;

namespace {

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

}  // namespace

TEST(Dtw, HandExample) {
  const std::vector<double> a = {0, 0, 1};
  const std::vector<double> b = {0, 1, 1};
  EXPECT_EQ(dtw(a, b, kUnboundedBand), 0.0);
  EXPECT_EQ(oracle::dtw_paths(a, b), 0.0);
  EXPECT_EQ(dtw(a, b, 0), 1.0);
}

TEST(Dtw, MatchesPathEnumeration) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 6;
    const auto a = random_series(rng, n);
    const auto b = random_series(rng, n);
    EXPECT_NEAR(dtw(a, b, kUnboundedBand), oracle::dtw_paths(a, b), 1e-9);
    const std::size_t band = static_cast<std::size_t>(t % 3);
    EXPECT_NEAR(dtw(a, b, band), oracle::dtw_paths(a, b, band), 1e-9);
  }
}

TEST(Dtw, UnequalLengthsWithinBand) {
  std::mt19937_64 rng(5);
  const auto a = random_series(rng, 6);
  const auto b = random_series(rng, 4);
  EXPECT_NEAR(dtw(a, b, kUnboundedBand), oracle::dtw_paths(a, b), 1e-9);
  EXPECT_NEAR(dtw(a, b, 2), oracle::dtw_paths(a, b, 2), 1e-9);
  try {
    dtw(a, b, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BandTooNarrow);
  }
}

TEST(Dtw, IdentitySymmetryBoundsAndBandMonotone) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_series(rng, 60);
    const auto b = random_series(rng, 60);
    EXPECT_EQ(dtw(a, a, 3), 0.0);
    EXPECT_EQ(dtw(a, b, 7), dtw(b, a, 7));
    const double diag = oracle::squared_distance(a, b);
    double prev = dtw(a, b, 0);
    EXPECT_NEAR(prev, diag, 1e-9 * diag);
    for (std::size_t band : {1u, 2u, 5u, 10u, 60u}) {
      const double d = dtw(a, b, band);
      EXPECT_LE(d, prev + 1e-12);
      EXPECT_GE(d, 0.0);
      prev = d;
    }
  }
}

TEST(Dtw, BoundedAgreesBelowCutoff) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_series(rng, 40);
    const auto b = random_series(rng, 40);
    const double d = dtw(a, b, 5);
    EXPECT_EQ(dtw_bounded(a, b, 5, d * 1.01), d);
    EXPECT_TRUE(std::isinf(dtw_bounded(a, b, 5, d * 0.5)) || dtw_bounded(a, b, 5, d * 0.5) == d);
  }
}

TEST(Knn, MatchesBruteForceScan) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const FeatureMatrix train = fixture::random_matrix(50, 6, 2, 0.4, 100 + t);
    const FeatureMatrix test = fixture::random_matrix(15, 6, 2, 0.4, 200 + t);
    DtwConfig cfg;
    cfg.band_radius = static_cast<std::size_t>(t % 4);
    cfg.meta_weight = 0.5 * t;
    const KnnDtwModel model = knn_fit(train, cfg);
    const ProbaMatrix p = model.predict_proba(test);
    for (std::size_t i = 0; i < test.rows(); ++i) {
      std::vector<double> dist;
      const auto x = test.row(i);
      for (std::size_t j = 0; j < train.rows(); ++j) {
        const auto r = train.row(j);
        dist.push_back(oracle::dtw_paths(x.first(6), r.first(6), cfg.band_radius) +
                       cfg.meta_weight * oracle::squared_distance(x.subspan(6), r.subspan(6)));
      }
      const auto nn = oracle::k_smallest(dist, 3);
      EXPECT_EQ(model.neighbors(x), nn);
      double pos = 0;
      for (std::size_t j : nn) pos += train.labels()[j];
      EXPECT_DOUBLE_EQ(p(i, 1), pos / 3.0);
      EXPECT_DOUBLE_EQ(p(i, 0) + p(i, 1), 1.0);
    }
  }
}

TEST(Knn, TiesGoToLowerIndex) {
  // Four identical training rows; the first three win.
  const FeatureMatrix train =
      fixture::matrix(fixture::columns(2, 0), {1, 1, 1, 1, 1, 1, 1, 1}, {0, 1, 1, 1});
  const KnnDtwModel model = knn_fit(train, {});
  const std::vector<double> q = {1, 1};
  EXPECT_EQ(model.neighbors(q), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Knn, SelfNeighbourAndProbabilityGrid) {
  const FeatureMatrix train = fixture::random_matrix(30, 8, 1, 0.5, 1);
  DtwConfig one;
  one.k = 1;
  const ProbaMatrix p = knn_fit(train, one).predict_proba(train);
  for (std::size_t i = 0; i < train.rows(); ++i) EXPECT_EQ(p(i, train.labels()[i]), 1.0);

  const ProbaMatrix q = knn_fit(train, {}).predict_proba(fixture::random_matrix(20, 8, 1, 0.5, 2));
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const double v = q(i, 1) * 3.0;
    EXPECT_NEAR(v, std::round(v), 1e-12);
  }
}

TEST(Knn, NearestAllPositive) {
  std::vector<double> v = {0, 0, 0, 0, 0, 0, 0, 0, 0, 9, 9, 9, 9, 9, 9};
  const FeatureMatrix train = fixture::matrix(fixture::columns(3, 0), v, {1, 1, 1, 0, 0});
  const FeatureMatrix test = fixture::matrix(fixture::columns(3, 0), {0, 0, 0}, {1});
  const ProbaMatrix p = knn_fit(train, {}).predict_proba(test);
  EXPECT_EQ(p(0, 0), 0.0);
  EXPECT_EQ(p(0, 1), 1.0);
}

TEST(Knn, FitStoresRowsAndValidates) {
  const FeatureMatrix train = fixture::random_matrix(12, 4, 1, 0.5, 3);
  EXPECT_EQ(knn_fit(train, {}).stored_rows(), 12u);
  DtwConfig sub;
  sub.train_subsample = 5;
  EXPECT_EQ(knn_fit(train, sub).stored_rows(), 5u);
  DtwConfig big;
  big.k = 13;
  try {
    knn_fit(train, big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::KTooLarge);
  }
  const FeatureMatrix other = fixture::random_matrix(3, 4, 2, 0.5, 4);
  try {
    knn_fit(train, {}).predict_proba(other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ColumnMismatch);
  }
}
