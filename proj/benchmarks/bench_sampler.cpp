#include <benchmark/benchmark.h>

#include "pytype/population.hpp"
#include "pytype/sampler.hpp"

using namespace pytype;

namespace {

void BM_PySampler(benchmark::State& state) {
  std::uint64_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_py_partition(0.5, 1.0, static_cast<std::uint64_t>(state.range(0)), RngStream{2, rep++}).K());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PySampler)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_IidPowerLaw(benchmark::State& state) {
  const auto pop = Population::power_law(2.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_iid(pop, static_cast<std::uint64_t>(state.range(0)), RngStream{3, rep++}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IidPowerLaw)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_PoissonizedPowerLaw(benchmark::State& state) {
  const auto pop = Population::power_law(2.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_poissonized(pop, static_cast<std::uint64_t>(state.range(0)), RngStream{4, rep++}));
  }
}
BENCHMARK(BM_PoissonizedPowerLaw)->RangeMultiplier(10)->Range(1000, 1000000);

}  // namespace
