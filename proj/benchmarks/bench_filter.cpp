#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "synthqa/feature_filter.hpp"
#include "synthqa/gen_metrics.hpp"

using namespace synthqa;

namespace {

FeatureMatrix features(const Eigen::MatrixXd& m) {
  std::vector<std::string> ids;
  std::vector<float> data;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ids.push_back("c" + std::to_string(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(static_cast<float>(m(i, j)));
  }
  return FeatureMatrix(std::move(ids), static_cast<std::size_t>(m.cols()), std::move(data));
}

}  // namespace

// Smallest stratum shape: 310 real rows of pool3 features.
static void BM_FitFilter(benchmark::State& state) {
  const auto real = bench::normal_rows(static_cast<std::size_t>(state.range(0)), 2048, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_filter(real));
}
BENCHMARK(BM_FitFilter)->Arg(310)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_FarthestPoint(benchmark::State& state) {
  const auto model = fit_filter(bench::normal_rows(310, 256, 2));
  const auto pool = features(bench::normal_rows(static_cast<std::size_t>(state.range(0)), 256, 3));
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_select(model, pool, pool.rows() / 2));
}
BENCHMARK(BM_FarthestPoint)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Fid(benchmark::State& state) {
  const auto a = bench::normal_rows(400, static_cast<std::size_t>(state.range(0)), 4);
  const auto b = bench::normal_rows(400, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(fid(a, b));
}
BENCHMARK(BM_Fid)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_Kid(benchmark::State& state) {
  const auto a = bench::normal_rows(1000, 2048, 6);
  const auto b = bench::normal_rows(1000, 2048, 7);
  KidConfig cfg;
  cfg.subsets = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kid(a, b, cfg));
}
BENCHMARK(BM_Kid)->Arg(10)->Unit(benchmark::kMillisecond);
