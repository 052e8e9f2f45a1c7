#include <random>

#include <benchmark/benchmark.h>

#include "oracles.hpp"
#include "swarmform/gain_design.hpp"
#include "swarmform/montecarlo.hpp"
#include "swarmform/sim.hpp"

using namespace swarmform;

static void BM_Step(benchmark::State& state) {
  FormationGenerator gen;
  gen.n = static_cast<std::size_t>(state.range(0));
  gen.volumeX = gen.volumeY = 3.0 * std::sqrt(static_cast<double>(gen.n));
  const auto plan = generate_formation(gen, GraphKind::NonComplete, 7);
  SimConfig cfg;
  cfg.assignmentMode = static_cast<AssignmentMode>(state.range(1));
  cfg.initAreaX = cfg.initAreaY = 4.0 * std::sqrt(static_cast<double>(gen.n));
  World w = make_world(cfg, plan, seeded_initial_positions(cfg, gen.n), seeded_yaws(cfg, gen.n));
  for (auto _ : state) step(w, cfg);
}
BENCHMARK(BM_Step)
    ->Args({10, static_cast<int>(AssignmentMode::None)})
    ->Args({10, static_cast<int>(AssignmentMode::Cbaa)})
    ->Args({20, static_cast<int>(AssignmentMode::Cbaa)})
    ->Unit(benchmark::kMicrosecond);

static void BM_Trial(benchmark::State& state) {
  const auto spec = oracles::slanted_hexagon();
  auto d = design_gains(spec);
  const auto plan = FormationPlan::make(spec, std::move(d.gains));
  SimConfig cfg;
  cfg.initAreaX = cfg.initAreaY = 8.0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(run_trial(cfg, plan));
  }
}
BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);
