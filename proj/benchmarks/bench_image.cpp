#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "synthqa/phash.hpp"
#include "synthqa/preprocess.hpp"

using namespace synthqa;

static void BM_PHash(benchmark::State& state) {
  const auto img = bench::disc_image(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(phash(img));
}
BENCHMARK(BM_PHash)->Arg(128)->Arg(512);

static void BM_PreprocessImage(benchmark::State& state) {
  const auto img = bench::disc_image(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_image(img));
}
BENCHMARK(BM_PreprocessImage)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_BrainMask(benchmark::State& state) {
  const auto img = bench::disc_image(512, 3);
  for (auto _ : state) benchmark::DoNotOptimize(extract_brain_mask(img));
}
BENCHMARK(BM_BrainMask)->Unit(benchmark::kMillisecond);
