#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "alle/dataset.hpp"
#include "alle/forest.hpp"
#include "alle/sensitivity.hpp"
#include "alle/svr.hpp"
#include "alle/synthgen.hpp"

namespace {

alle::GeneratorConfig bench_config() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  alle::GeneratorConfig c;
  c.state = alle::StateKind::d;
  c.grid = alle::table_grid(c.state);
  for (auto& r : c.response) r = {u(rng), u(rng) / 90.0, u(rng) / 8100.0};
  c.noise_sigma = 0.05;
  c.seed = 7;
  return c;
}

alle::SampleSet bench_set(std::size_t per_recording) {
  const auto c = bench_config();
  const auto data = alle::generate(c);
  std::vector<alle::Recording> smoothed;
  for (const auto& r : data.recordings) smoothed.push_back(alle::smooth(r, alle::SmoothingParams{}));
  return alle::assemble(smoothed, per_recording, c.grid);
}

void BM_Smooth(benchmark::State& state) {
  const auto data = alle::generate(bench_config());
  for (auto _ : state) benchmark::DoNotOptimize(alle::smooth(data.recordings.front(), alle::SmoothingParams{}));
}
BENCHMARK(BM_Smooth);

void BM_Criteria(benchmark::State& state) {
  const auto set = bench_set(250);
  for (auto _ : state) benchmark::DoNotOptimize(alle::criteria(alle::per_parameter_means(set)));
}
BENCHMARK(BM_Criteria);

void BM_ForestFit(benchmark::State& state) {
  const auto set = bench_set(static_cast<std::size_t>(state.range(0)));
  const alle::SensorList all(alle::all_sensors().begin(), alle::all_sensors().end());
  const auto x = alle::feature_matrix(set, all);
  const auto y = alle::label_vector(set);
  for (auto _ : state) benchmark::DoNotOptimize(alle::fit_forest(x, y, {100, 0, 5, 3}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(y.size()));
}
BENCHMARK(BM_ForestFit)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SvrFit(benchmark::State& state) {
  const auto set = bench_set(static_cast<std::size_t>(state.range(0)));
  const alle::SensorList all(alle::all_sensors().begin(), alle::all_sensors().end());
  const auto x = alle::feature_matrix(set, all);
  const auto y = alle::label_vector(set);
  for (auto _ : state) benchmark::DoNotOptimize(alle::fit_svr(x, y, alle::SvrParams{}));
}
BENCHMARK(BM_SvrFit)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
