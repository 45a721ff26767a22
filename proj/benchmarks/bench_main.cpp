#include <benchmark/benchmark.h>

#include <random>

#include "soz/fcn.hpp"
#include "soz/forest.hpp"
#include "soz/gbdt.hpp"
#include "soz/knn_dtw.hpp"
#include "soz/resample.hpp"
#include "soz/rng.hpp"
#include "soz/splits.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

soz::FeatureMatrix table(std::size_t rows, std::size_t cols, double pos_rate, std::uint64_t seed) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("m" + std::to_string(c));
  auto v = noise(rows * cols, seed);
  std::vector<int> y(rows);
  std::vector<std::string> keys(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = static_cast<double>(i % 1000) < pos_rate * 1000.0 ? 1 : 0;
    v[i * cols] += y[i];
    keys[i] = "P" + std::to_string(i % 5);
  }
  return soz::FeatureMatrix(names, v, y, keys);
}

void BM_Dtw(benchmark::State& state) {
  const auto a = noise(495, 1);
  const auto b = noise(495, 2);
  const auto band = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(soz::dtw(a, b, band));
}
BENCHMARK(BM_Dtw)->Arg(10)->Arg(50)->Arg(494);

void BM_RandomForest(benchmark::State& state) {
  const auto m = table(static_cast<std::size_t>(state.range(0)), 20, 0.3, 3);
  soz::ForestConfig cfg;
  cfg.n_estimators = 10;
  for (auto _ : state) benchmark::DoNotOptimize(soz::fit_random_forest(m, cfg));
}
BENCHMARK(BM_RandomForest)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Gbdt(benchmark::State& state) {
  const auto m = table(5000, 20, 0.3, 4);
  soz::BoostConfig cfg;
  cfg.n_estimators = 10;
  cfg.oblivious = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(soz::fit_gbdt(m, cfg));
}
BENCHMARK(BM_Gbdt)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FcnForward(benchmark::State& state) {
  soz::Rng rng(5);
  const soz::FcnNet net(502, static_cast<std::size_t>(state.range(0)), rng);
  const auto x = noise(32 * 502, 6);
  for (auto _ : state) benchmark::DoNotOptimize(soz::fcn_forward(net, x, 32));
}
BENCHMARK(BM_FcnForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Smote(benchmark::State& state) {
  const auto m = table(static_cast<std::size_t>(state.range(0)), 502, 0.08, 7);
  const auto folds = soz::partition(m, {{"P0", "P1", "P2", "P3", "P4"}, {}});
  for (auto _ : state) benchmark::DoNotOptimize(soz::smote(folds.train, {5, 1}));
}
BENCHMARK(BM_Smote)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
