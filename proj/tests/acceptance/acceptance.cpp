// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <numeric>
#include <stdexcept>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "oracles.hpp"
#include "swarmform/error.hpp"
#include "swarmform/gain_design.hpp"
#include "swarmform/montecarlo.hpp"
#include "swarmform/sim.hpp"

#ifdef SWARMFORM_WITH_CLI
#include "cli.hpp"
#include "swarmform/io.hpp"
#endif

using namespace swarmform;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("{} criterion {:>2}: {} ({})\n", pass ? "PASS" : "FAIL", id, what, detail);
  std::fflush(stdout);
}

std::shared_ptr<const FormationPlan> plan_for(FormationSpec spec) {
  auto d = design_gains(spec);
  if (!d.ok) throw std::runtime_error("gain design failed for " + spec.name);
  return FormationPlan::make(std::move(spec), std::move(d.gains));
}

double max_position_gap(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
  return worst;
}

// 1

void gain_design_correctness() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> density(0.4, 1.0);
  const std::size_t sizes[] = {5, 10, 20};
  std::size_t converged = 0, bad = 0;
  double worstNull = 0.0, worstSym = 0.0, worstLambda = -1e300;
  const auto t0 = Clock::now();
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = sizes[t % 3];
    const auto spec = oracles::random_formation(n, density(rng), rng);
    const auto d = design_gains(spec);
    if (!d.solved) continue;
    ++converged;
    const Eigen::MatrixXd D = oracles::dense_from_blocks(d.gains);
    const NullBasis nb = build_null_basis(spec);
    const double nullRes = (D * nb.N).cwiseAbs().rowwise().sum().maxCoeff();
    const double sym = (D - D.transpose()).cwiseAbs().maxCoeff();
    bool sparsity = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !spec.graph.adjacent(i, j))
          sparsity = sparsity && D.block(3 * i, 3 * j, 3, 3).cwiseAbs().maxCoeff() == 0.0;
    const Eigen::MatrixXd H = nb.Q.transpose() * D * nb.Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues().maxCoeff();
    worstNull = std::max(worstNull, nullRes);
    worstSym = std::max(worstSym, sym);
    worstLambda = std::max(worstLambda, lam);
    if (nullRes > 1e-6 || sym > 1e-10 || !sparsity || !(lam < 0.0)) ++bad;
  }
  const double secs = seconds_since(t0);
  report(1, bad == 0 && converged > 0 && secs < 60.0, "gain design invariants on 50 random formations",
         fmt::format("{} converged, {} violations, max |AN|inf {:.2e}, max asym {:.2e}, max lambda {:.3g}, {:.1f} s",
                     converged, bad, worstNull, worstSym, worstLambda, secs));
}

// 2

void complete_graph_oracle_equivalence() {
  std::mt19937_64 rng(202);
  bool pass = true;
  double worstObj = 0.0, worstZ = 0.0;
  std::size_t worstIter = 0;
  const auto t0 = Clock::now();
  for (std::size_t n : {4u, 6u, 10u}) {
    const auto spec = FormationSpec::make("complete", oracles::random_points(n, rng, 6.0, 2.0, 1.0),
                                          Graph::complete(n).edges());
    auto check = [&](const Eigen::MatrixXd& Z, double objective, std::size_t iters, bool conv, const OracleSolution& o,
                     double t, Eigen::Index k) {
      const double eObj = std::abs(objective - o.objective);
      const double eZ = (Z - (t / static_cast<double>(k)) * Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
      worstObj = std::max(worstObj, eObj);
      worstZ = std::max(worstZ, eZ);
      worstIter = std::max(worstIter, iters);
      pass = pass && conv && eObj <= 1e-5 && eZ <= 1e-4 && iters <= 5;
    };
    const auto zs = build_z_subproblem(spec);
    const auto rz = admm_solve(assemble_admm(zs));
    check(rz.Z, rz.objective, rz.iterations, rz.converged, complete_graph_oracle(zs), zs.traceTarget, zs.k());
    const auto xs = build_xy_subproblem(spec);
    const auto rx = admm_solve(assemble_admm(xs));
    check(rx.Z, rx.objective, rx.iterations, rx.converged, complete_graph_oracle(xs), xs.traceTarget, xs.k());
  }
  const double secs = seconds_since(t0);
  report(2, pass && secs < 5.0, "ADMM matches the complete-graph closed form for n = 4, 6, 10",
         fmt::format("max objective error {:.2e}, max Z error {:.2e}, max iterations {}, {:.2f} s", worstObj, worstZ,
                     worstIter, secs));
}

// 3

void scaling_trend() {
  std::mt19937_64 rng(303);
  std::string detail;
  bool pass = true;
  for (const auto& [n, budget] : {std::pair<std::size_t, double>{50, 60.0}, {100, 600.0}}) {
    const auto spec = oracles::random_formation(n, 0.9, rng);
    const auto t0 = Clock::now();
    const auto d = design_gains(spec);
    const double secs = seconds_since(t0);
    pass = pass && d.solved && secs < budget;
    detail += fmt::format("{}n={}: {:.1f} s (budget {:.0f} s), z {} in {} it, xy {} in {} it, gains {}",
                          detail.empty() ? "" : "; ", n, secs, budget, to_string(d.z.status), d.z.iterations,
                          to_string(d.xy.status), d.xy.iterations, d.ok ? "verified" : "not verified");
  }
  report(3, pass, "ADMM gain design at n = 50 and n = 100", detail);
}

// 4

void cbaa_guarantees() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  std::uniform_real_distribution<double> density(0.1, 1.0), u(0.0, 1.0);
  std::size_t bad = 0;
  double sumRatio = 0.0, minRatio = 1.0;
  const int instances = 1000;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = size(rng);
    const Graph g(n, oracles::random_connected_edges(n, density(rng), rng));
    const std::size_t d = oracles::floyd_warshall_diameter(g);
    std::vector<std::vector<double>> scores(n, std::vector<double>(n));
    if (t % 2 == 0) {
      for (auto& row : scores)
        for (auto& s : row) s = u(rng);
    } else {
      // Geometric scores from noisy positions around a formation.
      const auto pts = oracles::random_points(n, rng, 3.0 * std::sqrt(static_cast<double>(n)), 2.0, 1.0);
      std::normal_distribution<double> noise(0.0, 1.5);
      for (std::size_t i = 0; i < n; ++i)
        scores[i] = score(pts[i] + Vec3(noise(rng), noise(rng), noise(rng)), AlignmentTransform{}, pts);
    }
    const auto r = run_cbaa(g, scores);
    Eigen::MatrixXd S(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scores[i][j];
    const double opt = hungarian_oracle(S).total;
    const double ratio = opt > 0 ? r.totalScore / opt : 1.0;
    sumRatio += ratio;
    minRatio = std::min(minRatio, ratio);
    if (!r.assignment.is_bijection() || r.rounds != n * d || r.lastChangeRound > n * d || ratio < 0.5) ++bad;
  }
  report(4, bad == 0, "CBAA conflict-free within n*d rounds and C/C* >= 0.5 on 1000 instances",
         fmt::format("{} violations, mean C/C* {:.4f}, min C/C* {:.4f}", bad, sumRatio / instances, minRatio));
}

// 5

void hungarian_exactness() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::size_t mismatches = 0, total = 0;
  for (Eigen::Index n : {4, 5}) {
    for (int t = 0; t < 200; ++t, ++total) {
      Eigen::MatrixXd S(n, n);
      for (Eigen::Index i = 0; i < S.size(); ++i) S.data()[i] = u(rng);
      const auto h = hungarian_oracle(S);
      const auto b = oracles::brute_force_max(S);
      double recomputed = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) recomputed += S(i, static_cast<Eigen::Index>(h.sigma[i]));
      if (std::abs(h.total - b.total) > 1e-12 || std::abs(recomputed - b.total) > 1e-12 || h.sigma != b.sigma)
        ++mismatches;
    }
  }
  report(5, mismatches == 0, "Hungarian matches exhaustive search on 4x4 and 5x5",
         fmt::format("{} instances, {} mismatches", total, mismatches));
}

// 6

void alignment_optimality() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ang(-3.14159, 3.14159), off(-5.0, 5.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::size_t bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + t % 10;
    const auto p = oracles::random_points(n, rng, 6.0, 2.0, 0.5);
    const AlignmentTransform truth{ang(rng), Vec3(off(rng), off(rng), off(rng))};
    std::vector<Vec3> q;
    for (const auto& x : p) q.push_back(truth.apply(x) + Vec3(noise(rng), noise(rng), noise(rng)));
    const double got = alignment_objective(q, p, align(q, p));
    const double grid = oracles::grid_alignment_objective(q, p, 0.1);
    worst = std::max(worst, got - grid);
    if (got > grid + 1e-8) ++bad;
  }
  report(6, bad == 0, "alignment at least as good as a 0.1 deg grid on 100 instances",
         fmt::format("{} violations, max (align - grid) {:.3e}", bad, worst));
}

// 7

void yaw_invariance() {
  const auto plan = plan_for(oracles::slanted_hexagon());
  SimConfig cfg;
  cfg.noiseStd = 0.0;
  cfg.seed = 77;
  cfg.initAreaX = cfg.initAreaY = 8.0;
  const auto init = seeded_initial_positions(cfg, plan->spec.size());
  World a = make_world(cfg, plan, init, std::vector<double>(init.size(), 0.0));
  World b = make_world(cfg, plan, init, seeded_yaws(cfg, init.size()));
  double worst = 0.0;
  for (int s = 0; s < 500; ++s) {
    step(a, cfg);
    step(b, cfg);
    worst = std::max(worst, max_position_gap(a.positions(), b.positions()));
  }
  report(7, worst <= 1e-9, "random yaw offsets leave a 500-step noise-free run unchanged",
         fmt::format("max per-step position gap {:.3e} m", worst));
}

// 8

void shape_convergence() {
  const auto plan = plan_for(oracles::slanted_hexagon());
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SimConfig cfg;
    cfg.noiseStd = 0.0;
    cfg.avoidance.enabled = false;
    cfg.assignmentMode = AssignmentMode::None;
    cfg.seed = seed;
    World w = make_world(cfg, plan, seeded_initial_positions(cfg, 6), seeded_yaws(cfg, 6));
    double prev = shape_residual(w);
    double reached = -1.0;
    std::size_t increases = 0;
    while (w.time < 60.0 - 1e-9) {
      step(w, cfg);
      const double r = w.residual;
      if (reached < 0 && r < 1e-3) reached = w.time;
      if (w.time > 5.0 && r > prev * (1 + 1e-9) + 1e-13) ++increases;
      prev = r;
    }
    pass = pass && reached >= 0 && increases == 0;
    detail += fmt::format("{}seed {}: < 1e-3 at {}, {} increases", detail.empty() ? "" : "; ", seed,
                          reached >= 0 ? fmt::format("{:.2f} s", reached) : "never", increases);
  }
  report(8, pass, "noise-free n = 6 slanted shape converges and the residual decreases after 5 s", detail);
}

// 9 and 10

struct PopulationStats {
  std::vector<bool> none, cbaa, hungarian;
  double timeNone = 0.0, timeCbaa = 0.0;
  std::size_t joint = 0;
};

PopulationStats population(const MonteCarloResult& res, GraphKind g) {
  PopulationStats s;
  std::map<std::size_t, std::map<AssignmentMode, const TrialMetrics*>> by;
  for (const auto& r : res.records)
    if (r.graph == g) by[r.trial][r.mode] = &r.metrics;
  for (const auto& [trial, modes] : by) {
    const auto* na = modes.at(AssignmentMode::None);
    const auto* a = modes.at(AssignmentMode::Cbaa);
    s.none.push_back(na->success);
    s.cbaa.push_back(a->success);
    s.hungarian.push_back(modes.at(AssignmentMode::Hungarian)->success);
    if (na->success && a->success) {
      ++s.joint;
      s.timeNone += na->convergenceTime;
      s.timeCbaa += a->convergenceTime;
    }
  }
  if (s.joint) {
    s.timeNone /= static_cast<double>(s.joint);
    s.timeCbaa /= static_cast<double>(s.joint);
  }
  return s;
}

double rate(const std::vector<bool>& v) {
  return static_cast<double>(std::count(v.begin(), v.end(), true)) / static_cast<double>(v.size());
}

MonteCarloConfig desk_config() {
#ifdef SWARMFORM_DATA_DIR
  return load_montecarlo_config(fs::path(SWARMFORM_DATA_DIR) / "montecarlo" / "desk.json");
#else
  MonteCarloConfig c;
  c.trials = 50;
  c.masterSeed = 2024;
  c.sim.maxSimTime = 120;
  c.sim.gridlockTimeout = 30;
  return c;
#endif
}

void gridlock_and_safety(std::size_t extraViolations) {
  const MonteCarloConfig cfg = desk_config();
  const auto t0 = Clock::now();
  const MonteCarloResult res = run_montecarlo(cfg);
  const double secs = seconds_since(t0);

  const auto c = population(res, GraphKind::Complete);
  const double confA = bootstrap_confidence(c.cbaa, c.none, true);
  const double confH = bootstrap_confidence(c.hungarian, c.cbaa, false);
  const bool pass = rate(c.cbaa) >= 0.9 && rate(c.cbaa) > rate(c.none) && c.timeCbaa <= c.timeNone &&
                    confA >= 0.95 && confH >= 0.95;
  std::string detail = fmt::format(
      "complete graphs, n = {}, {} trials: NA {:.0f}%, A {:.0f}%, H {:.0f}%; mean time on {} joint successes A {:.2f} "
      "s vs NA {:.2f} s; P(A > NA) {:.3f}, P(H >= A) {:.3f}",
      cfg.generator.n, cfg.trials, 100 * rate(c.none), 100 * rate(c.cbaa), 100 * rate(c.hungarian), c.joint,
      c.timeCbaa, c.timeNone, confA, confH);
  if (std::find(cfg.graphs.begin(), cfg.graphs.end(), GraphKind::NonComplete) != cfg.graphs.end()) {
    const auto nc = population(res, GraphKind::NonComplete);
    detail += fmt::format("; non-complete (informational): NA {:.0f}%, A {:.0f}%, H {:.0f}%", 100 * rate(nc.none),
                          100 * rate(nc.cbaa), 100 * rate(nc.hungarian));
  }
  detail += fmt::format("; {:.0f} s", secs);
  report(9, pass, "assignment resolves gridlock in seeded desk-scale trials", detail);

  std::size_t violations = extraViolations, trials = 0;
  double minSep = std::numeric_limits<double>::infinity();
  for (const auto& r : res.records) {
    ++trials;
    violations += r.metrics.safetyViolations;
    minSep = std::min(minSep, r.metrics.minSeparation);
  }
  const double stop = cfg.sim.avoidance.stopThreshold;
  report(10, violations == 0 && minSep >= stop, "no separation below the stop threshold with avoidance on",
         fmt::format("{} Monte Carlo trials plus the yaw runs, {} violations, min separation {:.3f} m (threshold {} m)",
                     trials, violations, minSep, stop));
}

std::size_t yaw_run_violations() {
  const auto plan = plan_for(oracles::slanted_hexagon());
  std::size_t v = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.initAreaX = cfg.initAreaY = 6.0;
    v += run_trial(cfg, plan).safetyViolations;
  }
  return v;
}

// 11

void bandwidth_accounting() {
  std::mt19937_64 rng(1111);
  bool pass = true;
  std::string detail;
  for (std::size_t n : {6u, 10u}) {
    auto spec = oracles::random_formation(n, 0.5, rng);
    const std::size_t d = graph_diameter(spec.graph);
    const std::size_t edges = spec.graph.edge_count();
    const auto plan = plan_for(std::move(spec));
    SimConfig cfg;
    cfg.seed = 11;
    World w = make_world(cfg, plan, seeded_initial_positions(cfg, n), seeded_yaws(cfg, n));
    const std::size_t steps = 400;
    for (std::size_t s = 0; s < steps; ++s) step(w, cfg);
    const std::size_t expected = 8 * (n + 1) * n * d;
    const auto& bw = w.bandwidth;
    bool ok = !bw.cbaaBytesPerLink.empty();
    for (auto b : bw.cbaaBytesPerLink) ok = ok && b == expected;
    ok = ok && bw.cbaaBytes == bw.cbaaBytesPerLink.size() * expected * 2 * edges;
    // One run at dispatch, then every period.
    const std::size_t period = ReassignmentSchedule(cfg.reassignPeriod, cfg.dt).period_steps();
    ok = ok && bw.cbaaBytesPerLink.size() == 1 + steps / period;
    ok = ok && bw.localizationMessages == steps * 2 * edges &&
         bw.localizationBytes == bw.localizationMessages * kPoseRecordBytes;
    pass = pass && ok;
    detail += fmt::format("{}n={} d={}: {} runs at {} B/link (expected {}), {} pose messages over {} steps (expected {})",
                          detail.empty() ? "" : "; ", n, d, bw.cbaaBytesPerLink.size(),
                          bw.cbaaBytesPerLink.empty() ? 0 : bw.cbaaBytesPerLink.front(), expected,
                          bw.localizationMessages, steps, steps * 2 * edges);
  }
  report(11, pass, "CBAA bytes per link equal 8(n+1)*n*d and pose messages follow the schedule", detail);
}

// 12

void determinism() {
#ifdef SWARMFORM_WITH_CLI
  const fs::path root = fs::temp_directory_path() / "swarmform_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path data = SWARMFORM_DATA_DIR;
  const std::string gains = (root / "gains").string();
  const fs::path mc = root / "mc.json";
  write_text_file(mc, R"({"trials":4,"master_seed":9,"sim":{"max_sim_time":60,"gridlock_timeout":20},
    "generator":{"n":6,"volume":[7,7,2]}})");
  auto run = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (rc != 0) fmt::print("  cli exit {}: {}", rc, err.str());
    return rc;
  };
  int rc = 0;
  for (const char* tag : {"a", "b"}) {
    rc |= run({"simulate", (data / "scenarios" / "cycle.json").string(), "--design", "--gains-dir", gains,
               "--output-dir", (root / tag / "sim").string(), "--trace", "--assignment-trace"});
    rc |= run({"montecarlo", mc.string(), "--output-dir", (root / tag / "mc").string(),
               "--threads", tag[0] == 'a' ? "1" : "2"});
  }
  std::size_t compared = 0, differing = 0;
  for (const char* f : {"sim/transitions.csv", "sim/trace.csv", "sim/assignments.csv", "mc/trials.csv",
                        "mc/aggregate.csv"}) {
    ++compared;
    if (rc != 0 || read_text_file(root / "a" / f) != read_text_file(root / "b" / f)) ++differing;
  }
  fs::remove_all(root);
  report(12, rc == 0 && differing == 0, "CLI reruns with the same seed and config are byte-identical",
         fmt::format("{} files compared, {} differ", compared, differing));
#else
  report(12, false, "CLI reruns with the same seed and config are byte-identical", "built without the CLI");
#endif
}

}  // namespace

int main() {
  try {
    gain_design_correctness();
    complete_graph_oracle_equivalence();
    scaling_trend();
    cbaa_guarantees();
    hungarian_exactness();
    alignment_optimality();
    yaw_invariance();
    shape_convergence();
    const std::size_t extra = yaw_run_violations();
    gridlock_and_safety(extra);
    bandwidth_accounting();
    determinism();
  } catch (const std::exception& e) {
    fmt::print("FAIL acceptance aborted: {}\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
