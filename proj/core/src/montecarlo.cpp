#include "swarmform/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "swarmform/error.hpp"

namespace swarmform {

std::string to_string(GraphKind g) { return g == GraphKind::Complete ? "complete" : "non-complete"; }

GraphKind parse_graph_kind(const std::string& s) {
  if (s == "complete") return GraphKind::Complete;
  if (s == "non-complete" || s == "noncomplete") return GraphKind::NonComplete;
  throw PreconditionError("unknown graph kind '" + s + "'");
}

std::vector<Vec3> random_formation_points(const FormationGenerator& gen, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-0.5 * gen.volumeX, 0.5 * gen.volumeX);
  std::uniform_real_distribution<double> uy(-0.5 * gen.volumeY, 0.5 * gen.volumeY);
  std::uniform_real_distribution<double> uz(0.0, gen.volumeZ);
  constexpr std::size_t kMaxAttempts = 100000;
  std::vector<Vec3> pts;
  std::size_t attempts = 0;
  while (pts.size() < gen.n) {
    if (++attempts > kMaxAttempts) {
      throw InfeasibleDensityError("could not place " + std::to_string(gen.n) + " formation points with spacing " +
                                   std::to_string(gen.minSpacing) + " m");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    const Vec3 c(x, y, z);
    if (std::all_of(pts.begin(), pts.end(), [&](const Vec3& p) { return (p - c).norm() >= gen.minSpacing; }))
      pts.push_back(c);
  }
  return pts;
}

std::shared_ptr<const FormationPlan> generate_formation(const FormationGenerator& gen, GraphKind kind,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x666f726dULL));
  const std::vector<Vec3> pts = random_formation_points(gen, rng);
  std::mt19937_64 edgeRng(splitmix64(seed ^ 0x65646765ULL));
  std::bernoulli_distribution coin(gen.edgeDensity);
  const std::size_t attempts = kind == GraphKind::Complete ? 1 : std::max<std::size_t>(1, gen.maxDesignAttempts);
  for (std::size_t a = 0; a < attempts; ++a) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < gen.n; ++i)
      for (std::size_t j = i + 1; j < gen.n; ++j)
        if (kind == GraphKind::Complete || coin(edgeRng)) edges.push_back({i, j});
    if (kind == GraphKind::NonComplete && edges.size() == gen.n * (gen.n - 1) / 2) continue;
    if (!Graph(gen.n, edges).is_connected()) continue;
    FormationSpec spec = FormationSpec::make("random-" + to_string(kind), pts, edges);
    DesignResult d = design_gains(spec, gen.design);
    if (d.ok) return FormationPlan::make(std::move(spec), std::move(d.gains));
  }
  throw NumericalFailureError("no random " + to_string(kind) + " graph produced verified gains", 0);
}

std::uint64_t trial_seed(std::uint64_t masterSeed, std::size_t trial) {
  return splitmix64(masterSeed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
  std::vector<AggregateRow> rows;
  auto find = [&](GraphKind g, AssignmentMode m) -> AggregateRow& {
    for (auto& r : rows)
      if (r.graph == g && r.mode == m) return r;
    rows.push_back({});
    rows.back().graph = g;
    rows.back().mode = m;
    rows.back().minSeparation = std::numeric_limits<double>::infinity();
    return rows.back();
  };
  for (const auto& rec : records) find(rec.graph, rec.mode);
  for (auto& row : rows) {
    std::vector<double> dist, time;
    double reassign = 0.0, swaps = 0.0, halts = 0.0, bytes = 0.0;
    for (const auto& rec : records) {
      if (rec.graph != row.graph || rec.mode != row.mode) continue;
      const auto& m = rec.metrics;
      ++row.trials;
      reassign += static_cast<double>(m.reassignmentCount);
      swaps += static_cast<double>(m.swapEvents);
      halts += static_cast<double>(m.haltEvents);
      bytes += m.bytesPerAgentPerSecond;
      row.safetyViolations += m.safetyViolations;
      row.minSeparation = std::min(row.minSeparation, m.minSeparation);
      if (m.success) {
        ++row.successes;
        dist.push_back(m.meanDistanceTraveled);
        time.push_back(m.convergenceTime);
      }
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
      mean = sd = 0.0;
      if (v.empty()) return;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      if (v.size() < 2) return;
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    };
    stats(dist, row.distanceMean, row.distanceStd);
    stats(time, row.timeMean, row.timeStd);
    const double t = static_cast<double>(std::max<std::size_t>(1, row.trials));
    row.successRate = static_cast<double>(row.successes) / t;
    row.reassignmentMean = reassign / t;
    row.swapMean = swaps / t;
    row.haltMean = halts / t;
    row.bytesPerAgentPerSecondMean = bytes / t;
  }
  return rows;
}

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg) {
  if (cfg.trials < 1) throw PreconditionError("Monte Carlo needs at least one trial");
  cfg.sim.validate();
  const std::size_t perTrial = cfg.graphs.size() * cfg.modes.size();
  std::vector<TrialRecord> records(cfg.trials * perTrial);

  auto runTrial = [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(cfg.masterSeed, t);
    std::size_t slot = t * perTrial;
    for (GraphKind g : cfg.graphs) {
      const auto plan = generate_formation(cfg.generator, g, seed);
      for (AssignmentMode m : cfg.modes) {
        SimConfig sc = cfg.sim;
        sc.seed = seed;
        sc.assignmentMode = m;
        TrialRecord& rec = records[slot++];
        rec.trial = t;
        rec.graph = g;
        rec.mode = m;
        rec.metrics = run_trial(sc, plan);
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.trials));
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) runTrial(t);
  } else {
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
      for (;;) {
        std::size_t t;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= cfg.trials || failure) return;
          t = next++;
        }
        try {
          runTrial(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  MonteCarloResult res;
  res.records = std::move(records);
  res.rows = aggregate(res.records);
  return res;
}

double bootstrap_confidence(const std::vector<bool>& a, const std::vector<bool>& b, bool strict,
                            std::size_t resamples, std::uint64_t seed) {
  if (a.size() != b.size() || a.empty()) throw PreconditionError("bootstrap needs paired non-empty samples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    long diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::size_t k = pick(rng);
      diff += static_cast<long>(a[k]) - static_cast<long>(b[k]);
    }
    if (strict ? diff > 0 : diff >= 0) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(resamples);
}

}  // namespace swarmform
