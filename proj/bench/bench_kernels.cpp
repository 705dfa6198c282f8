// Serial reference vs OpenMP kernels. Run with e.g.
//   OMP_NUM_THREADS=4 ./bench_kernels --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include "cowqkd/attacks.hpp"
#include "cowqkd/experiments.hpp"
#include "cowqkd/montecarlo.hpp"

using namespace cowqkd;

namespace {

const ProtocolParams kParams{0.2, 0.1, 0.2};
constexpr double kLength = 20.0;

ActiveAttackPlan default_plan() {
  return active_plan(kParams, kLength, optimal_mu_e(kParams, kLength));
}

void BM_AttackSerial(benchmark::State& state) {
  const auto plan = default_plan();
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mc::serial::simulate_active_attack(kParams, kLength, plan, n, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AttackParallel(benchmark::State& state) {
  const auto plan = default_plan();
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mc::simulate_active_attack(kParams, kLength, plan, n, 42, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_NoAttackSerial(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mc::serial::simulate_no_attack(kParams, kLength, n, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_NoAttackParallel(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mc::simulate_no_attack(kParams, kLength, n, 42, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QberSweep(benchmark::State& state) {
  SweepSpec spec;
  spec.lengths = {0.0, 150.0, 0.1};
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_qber_curves(spec, threads));
}

void BM_OptimalIntensitySweep(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sweep_optimal_intensity(0.2, 0.1, {1.0, 100.0, 1.0}, threads));
}

}  // namespace

BENCHMARK(BM_AttackSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttackParallel)
    ->ArgsProduct({{1 << 20}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_NoAttackSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoAttackParallel)
    ->ArgsProduct({{1 << 20}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_QberSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OptimalIntensitySweep)
    ->Arg(1)
    ->Arg(4)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
