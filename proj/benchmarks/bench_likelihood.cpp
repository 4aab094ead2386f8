#include <benchmark/benchmark.h>

#include "pytype/estimators.hpp"
#include "pytype/likelihood.hpp"
#include "pytype/sampler.hpp"

using namespace pytype;

namespace {

PartitionStats sample(std::int64_t n) { return sample_py_partition(0.5, 1.0, static_cast<std::uint64_t>(n), RngStream{1, 0}); }

void BM_LogEppf(benchmark::State& state) {
  const auto st = sample(state.range(0));
  double s = 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_eppf(st, {s, 1.0}));
    s = s < 0.8 ? s + 1e-3 : 0.2;
  }
  state.counters["k"] = static_cast<double>(st.K());
}
BENCHMARK(BM_LogEppf)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_MleSigma(benchmark::State& state) {
  const auto st = sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mle_sigma(st, 1.0).sigma_hat);
}
BENCHMARK(BM_MleSigma)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_ProfileMle(benchmark::State& state) {
  const auto st = sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(profile_mle(st).sigma_hat);
}
BENCHMARK(BM_ProfileMle)->Arg(10000)->Arg(100000);

}  // namespace
