#include <random>

#include <benchmark/benchmark.h>

#include "oracles.hpp"
#include "swarmform/assignment.hpp"

using namespace swarmform;

namespace {

std::vector<std::vector<double>> random_scores(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> s(n, std::vector<double>(n));
  for (auto& row : s)
    for (auto& v : row) v = u(rng);
  return s;
}

}  // namespace

static void BM_Cbaa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  const Graph g(n, oracles::random_connected_edges(n, 0.3, rng));
  const auto scores = random_scores(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(run_cbaa(g, scores));
}
BENCHMARK(BM_Cbaa)->Arg(10)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_min_cost(C));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_Align(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const auto p = oracles::random_points(static_cast<std::size_t>(state.range(0)), rng);
  std::vector<Vec3> q;
  for (const auto& x : p) q.push_back(rot_z(0.4) * x + Vec3(1, 2, 0));
  for (auto _ : state) benchmark::DoNotOptimize(align(q, p));
}
BENCHMARK(BM_Align)->Arg(6)->Arg(30);
