#include <benchmark/benchmark.h>

#include <string>

#include "xsite/randomization.hpp"
#include "xsite/regression.hpp"
#include "xsite/rng.hpp"
#include "xsite/simulator.hpp"

namespace {

using namespace xsite;

void BM_ClusterHash(benchmark::State& state) {
  const std::string key = "user-000123456";
  std::uint64_t salt = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cluster_hash(key, salt++));
}
BENCHMARK(BM_ClusterHash);

void BM_OlsFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 3;
  auto s = make_stream(1, StreamTag::Historical);
  RegressionDataset d;
  d.d = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const bool z = s.bernoulli(0.5);
    double y = 0.5 * z;
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = s.normal();
      d.x.push_back(x);
      y += x;
    }
    d.y.push_back(y + s.normal());
    d.z.push_back(z);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ols_fit(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OlsFit)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_RunReplication(benchmark::State& state) {
  SyntheticSpec spec;
  spec.mu = ExposureValues(1.0, 0.0, 1.5, 2.5, 0.5, -0.5);
  spec.covariate_coeffs = {1.0};
  spec.n_users = static_cast<std::size_t>(state.range(0));
  spec.seed = 7;
  std::uint64_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(spec, DesignConfig{}, rep++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunReplication)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
