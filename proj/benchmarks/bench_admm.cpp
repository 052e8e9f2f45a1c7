#include <random>

#include <benchmark/benchmark.h>

#include "oracles.hpp"
#include "swarmform/gain_design.hpp"

using namespace swarmform;

static void BM_AssembleXY(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto spec = oracles::random_formation(static_cast<std::size_t>(state.range(0)), 0.9, rng);
  const auto sub = build_xy_subproblem(spec);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_admm(sub));
}
BENCHMARK(BM_AssembleXY)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_DesignGains(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto spec = oracles::random_formation(static_cast<std::size_t>(state.range(0)), 0.9, rng);
  for (auto _ : state) benchmark::DoNotOptimize(design_gains(spec));
}
BENCHMARK(BM_DesignGains)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_AdmmIterate(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto spec = oracles::random_formation(static_cast<std::size_t>(state.range(0)), 0.7, rng);
  const auto prob = assemble_admm(build_xy_subproblem(spec));
  AdmmState st = admm_initial_state(prob, {});
  for (auto _ : state) admm_iterate(prob, st);
}
BENCHMARK(BM_AdmmIterate)->Arg(10)->Arg(30)->Arg(50)->Unit(benchmark::kMicrosecond);
