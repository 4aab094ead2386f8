#include <benchmark/benchmark.h>

#include "pytype/asymptotics.hpp"
#include "pytype/atom_sums.hpp"
#include "pytype/population.hpp"

using namespace pytype;

namespace {

void BM_AtomSums(benchmark::State& state) {
  const auto pop = Population::power_law(2.0);
  const double n = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(atom_sums(pop, n, 0.5));
}
BENCHMARK(BM_AtomSums)->RangeMultiplier(100)->Range(1000, 10000000);

void BM_RootSolve(benchmark::State& state) {
  const auto pop = Population::power_law(2.0);
  const double n = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sigma0n_root(pop, n));
}
BENCHMARK(BM_RootSolve)->RangeMultiplier(100)->Range(1000, 10000000);

void BM_Tau2(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tau2_sq(0.5));
}
BENCHMARK(BM_Tau2);

void BM_Tau1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tau1_sq(0.5));
}
BENCHMARK(BM_Tau1);

}  // namespace
