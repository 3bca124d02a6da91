#include <benchmark/benchmark.h>

#include <random>

#include "lens/acquisition.hpp"
#include "lens/cost_models.hpp"
#include "lens/gp.hpp"
#include "lens/mobo.hpp"
#include "lens/pareto.hpp"
#include "lens/runtime.hpp"

using namespace lens;

namespace {

const WirelessProfile kLte{Technology::LTE, 3.0, 0.02, 0.43839, 1.28804};

void BM_EvaluateDeployment(benchmark::State& state) {
  const SearchSpace space;
  const auto device = DeviceProfile::synthetic_gpu();
  std::mt19937_64 rng(1);
  std::vector<ArchitectureSpec> specs;
  for (int i = 0; i < 64; ++i) specs.push_back(decode(sample_random(space, rng), space));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_deployment(specs[i++ % specs.size()], device, kLte));
}
BENCHMARK(BM_EvaluateDeployment);

FeatureMatrix encoded(std::size_t n, std::uint64_t seed) {
  const SearchSpace space;
  std::mt19937_64 rng(seed);
  FeatureMatrix x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(encode_features(sample_random(space, rng), space));
  return x;
}

void BM_GpFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = encoded(n, 2);
  std::vector<double> y(n);
  std::mt19937_64 rng(3);
  for (auto& v : y) v = std::normal_distribution<double>()(rng);
  for (auto _ : state) benchmark::DoNotOptimize(GpSurrogate::fit(x, y, GpHyperparams{}));
}
BENCHMARK(BM_GpFit)->Arg(20)->Arg(60)->Arg(120);

void BM_JointPoolSample(benchmark::State& state) {
  const auto x = encoded(120, 4);
  const auto pool = encoded(static_cast<std::size_t>(state.range(0)), 5);
  std::vector<GpSurrogate> gps;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> y(x.size());
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    gps.push_back(GpSurrogate::fit(x, y, GpHyperparams{}));
  }
  for (auto _ : state) benchmark::DoNotOptimize(sample_posterior_on_pool(gps, pool, rng));
}
BENCHMARK(BM_JointPoolSample)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Hypervolume(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ObjectiveVector> pts;
  for (int i = 0; i < state.range(0); ++i) {
    // points near the simplex surface, so most are nondominated
    const double a = u(rng), b = u(rng) * (1 - a);
    pts.push_back({a, b, 1 - a - b + 0.01 * u(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(hypervolume(pts, ObjectiveVector{2, 2, 2}));
}
BENCHMARK(BM_Hypervolume)->Arg(50)->Arg(200)->Arg(1000);

void BM_DominanceMap(benchmark::State& state) {
  const SearchSpace space;
  const auto options =
      deployment_options(evaluate_deployment(decode(sample_random(space, 8), space), DeviceProfile::synthetic_cpu(), kLte));
  for (auto _ : state) benchmark::DoNotOptimize(build_dominance_map(options, Metric::Energy, kLte));
}
BENCHMARK(BM_DominanceMap);

void BM_SearchIterations(benchmark::State& state) {
  const SearchSpace space;
  const auto device = DeviceProfile::synthetic_gpu();
  ProxyEvaluator proxy;
  SearchConfig config;
  config.initial_samples = 20;
  config.iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_search(config, space, device, kLte, proxy));
}
BENCHMARK(BM_SearchIterations)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
