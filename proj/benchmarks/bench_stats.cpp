#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "synthqa/paired_tests.hpp"

using namespace synthqa;

namespace {

// Held-out set shape: 1,000 images, 10 seeds.
PredictionCube cube(const std::string& name, double accuracy, std::uint64_t seed) {
  auto rng = stream_engine(seed, 0);
  PredictionCube c;
  c.condition = name;
  for (std::int64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  for (std::size_t i = 0; i < 1000; ++i) {
    c.image_ids.push_back("test_" + std::to_string(10000 + i));
    c.true_class.push_back(kAllClasses[i % 4]);
  }
  const auto cut = static_cast<std::uint64_t>(accuracy * 1000);
  for (std::size_t s = 0; s < 10; ++s)
    for (std::size_t i = 0; i < 1000; ++i)
      c.pred_class.push_back(uniform_index(rng, 1000) < cut ? c.true_class[i] : kAllClasses[(i + 1) % 4]);
  return c;
}

}  // namespace

static void BM_PairedPermutation(benchmark::State& state) {
  const auto a = cube("a", 0.94, 1), b = cube("b", 0.93, 2);
  const ResampleConfig cfg{static_cast<std::size_t>(state.range(0)), 42, 1};
  for (auto _ : state) benchmark::DoNotOptimize(paired_permutation(a, b, Metric::tumour_accuracy, cfg));
}
BENCHMARK(BM_PairedPermutation)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_Bootstrap(benchmark::State& state) {
  const auto a = cube("a", 0.94, 1), b = cube("b", 0.93, 2);
  const ResampleConfig cfg{static_cast<std::size_t>(state.range(0)), 42, 1};
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(a, b, Metric::macro_f1, cfg));
}
BENCHMARK(BM_Bootstrap)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SignFlip(benchmark::State& state) {
  std::vector<double> a, b;
  for (int i = 0; i < state.range(0); ++i) {
    a.push_back(1.0 + 0.1 * i);
    b.push_back(1.05 * i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(sign_flip_test(a, b));
}
BENCHMARK(BM_SignFlip)->Arg(10)->Arg(20);
