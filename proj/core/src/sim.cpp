#include "swarmform/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "swarmform/error.hpp"

namespace swarmform {

std::string to_string(AssignmentMode m) {
  switch (m) {
    case AssignmentMode::None:
      return "none";
    case AssignmentMode::Cbaa:
      return "cbaa";
    case AssignmentMode::Hungarian:
      return "hungarian";
  }
  return "none";
}

AssignmentMode parse_assignment_mode(const std::string& s) {
  if (s == "none" || s == "NA") return AssignmentMode::None;
  if (s == "cbaa" || s == "A") return AssignmentMode::Cbaa;
  if (s == "hungarian" || s == "H") return AssignmentMode::Hungarian;
  throw PreconditionError("unknown assignment mode '" + s + "'");
}

void SimConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string(name) + " must be positive");
  };
  positive(dt, "dt");
  positive(maxSimTime, "maxSimTime");
  positive(gridlockTimeout, "gridlockTimeout");
  positive(reassignPeriod, "reassignPeriod");
  positive(initAreaX, "initArea x");
  positive(initAreaY, "initArea y");
  positive(minInitSeparation, "minInitSeparation");
  positive(convergence.shapeTol, "shapeTol");
  positive(convergence.velEps, "velEps");
  positive(avoidance.activationRadius, "activationRadius");
  positive(avoidance.maxSpeed, "maxSpeed");
  if (convergence.holdTime < 0.0) throw PreconditionError("holdTime must be non-negative");
  if (avoidance.stopThreshold < 0.0) throw PreconditionError("stopThreshold must be non-negative");
  if (noiseStd < 0.0) throw PreconditionError("noiseStd must be non-negative");
  if (initAltitudeMax < initAltitudeMin) throw PreconditionError("initAltitude range is empty");
  if (gridlockTimeout > maxSimTime) throw PreconditionError("gridlockTimeout must not exceed maxSimTime");
}

std::shared_ptr<const FormationPlan> FormationPlan::make(FormationSpec spec, GainMatrix gains) {
  if (gains.size() != spec.size()) throw PreconditionError("gain matrix size differs from formation size");
  auto plan = std::make_shared<FormationPlan>();
  plan->basis = build_null_basis(spec);
  plan->spec = std::move(spec);
  plan->gains = std::move(gains);
  return plan;
}

std::vector<Vec3> World::positions() const {
  std::vector<Vec3> q;
  q.reserve(agents.size());
  for (const auto& a : agents) q.push_back(a.pose.position());
  return q;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Vec3> sample_initial_positions(const SimConfig& cfg, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-0.5 * cfg.initAreaX, 0.5 * cfg.initAreaX);
  std::uniform_real_distribution<double> uy(-0.5 * cfg.initAreaY, 0.5 * cfg.initAreaY);
  std::uniform_real_distribution<double> uz(cfg.initAltitudeMin, cfg.initAltitudeMax);
  constexpr std::size_t kMaxAttempts = 100000;
  std::vector<Vec3> pts;
  std::size_t attempts = 0;
  while (pts.size() < n) {
    if (++attempts > kMaxAttempts) {
      throw InfeasibleDensityError("could not place " + std::to_string(n) + " agents with separation " +
                                   std::to_string(cfg.minInitSeparation) + " m after " +
                                   std::to_string(kMaxAttempts) + " attempts");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    const Vec3 c(x, y, z);
    const bool ok = std::all_of(pts.begin(), pts.end(),
                                [&](const Vec3& p) { return (p - c).norm() >= cfg.minInitSeparation; });
    if (ok) pts.push_back(c);
  }
  return pts;
}

namespace {

double min_pairwise_distance(const std::vector<Vec3>& q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j) best = std::min(best, (q[i] - q[j]).norm());
  return best;
}

void reset_progress(World& w) {
  w.residual = shape_residual(w);
  w.bestResidual = w.residual;
  w.lastProgressTime = w.time;
  w.holdStart.reset();
  w.converged = false;
  w.convergenceTime = 0.0;
}

// Noisy relative position of `other` seen from `self`, in self's body frame.
Vec3 observe(World& w, const SimConfig& cfg, std::size_t self, std::size_t other,
             std::normal_distribution<double>& noise) {
  const auto& a = w.agents[self];
  Vec3 rel = rotate_z(w.agents[other].pose.position() - a.pose.position(), -a.yaw_offset());
  if (cfg.noiseStd > 0.0) {
    for (int c = 0; c < 3; ++c) rel(c) += noise(w.noiseRng);
  }
  return rel;
}

}  // namespace

World make_world(const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan, const std::vector<Vec3>& positions,
                 const std::vector<double>& yaws) {
  cfg.validate();
  if (!plan) throw PreconditionError("world needs a formation plan");
  const std::size_t n = plan->spec.size();
  if (positions.size() != n || yaws.size() != n) {
    throw PreconditionError("initial state must have one position and yaw per formation point");
  }
  World w;
  w.plan = std::move(plan);
  w.noiseRng.seed(splitmix64(cfg.seed ^ 0x6e6f697365ULL));
  for (std::size_t i = 0; i < n; ++i) {
    AgentState a;
    a.id = i;
    a.pose = Pose(positions[i], yaws[i]);
    w.agents.push_back(a);
  }
  w.sigma = AssignmentMap::identity(n);
  w.minSeparation = min_pairwise_distance(positions);
  reset_progress(w);
  return w;
}

void dispatch_formation(World& world, const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan) {
  (void)cfg;
  if (!plan || plan->spec.size() != world.size()) throw PreconditionError("formation size differs from swarm size");
  world.plan = std::move(plan);
  world.sigma = AssignmentMap::identity(world.size());
  world.assignmentPending = true;
  reset_progress(world);
}

Graph communication_graph(const World& w) {
  const std::size_t n = w.size();
  Graph g(n);
  const auto inv = w.sigma.inverse();
  for (const auto& e : w.plan->spec.graph.edges()) g.add_edge(inv[e.first], inv[e.second]);
  return g;
}

double shape_residual(const World& w) {
  const std::size_t n = w.size();
  Eigen::VectorXd q(3 * static_cast<Eigen::Index>(n));
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = w.agents[i].pose.position();
    q.segment<3>(3 * static_cast<Eigen::Index>(w.sigma.sigma[i])) = p;
    mean += p;
  }
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) spread += (w.agents[i].pose.position() - mean).squaredNorm();
  spread = std::sqrt(spread);
  const double off = (w.plan->basis.Q.transpose() * q).norm();
  if (spread == 0.0) return off == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return off / spread;
}

void reassign(World& w, const SimConfig& cfg) {
  if (cfg.assignmentMode == AssignmentMode::None) return;
  const std::size_t n = w.size();
  const auto& pts = w.plan->spec.points;
  AssignmentMap next;
  AssignmentEvent event;
  if (cfg.assignmentMode == AssignmentMode::Cbaa) {
    const Graph comm = communication_graph(w);
    std::normal_distribution<double> noise(0.0, cfg.noiseStd > 0.0 ? cfg.noiseStd : 1.0);
    std::vector<std::vector<double>> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& self = w.agents[i];
      std::vector<Vec3> q{self.pose.position()};
      std::vector<Vec3> p{pts[w.sigma.sigma[i]]};
      for (auto k : comm.neighbors(i)) {
        q.push_back(self.pose.position() + rotate_z(observe(w, cfg, i, k, noise), self.yaw_offset()));
        p.push_back(pts[w.sigma.sigma[k]]);
      }
      scores[i] = score(self.pose.position(), align(q, p), pts);
    }
    const CbaaResult res = run_cbaa(comm, scores);
    w.bandwidth.cbaaBytes += res.totalBytes;
    w.bandwidth.cbaaBytesPerLink.push_back(res.bytesPerLink);
    next = res.assignment;
    if (w.logAssignments) {
      Eigen::MatrixXd S(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scores[i][j];
      event.rounds = res.rounds;
      event.totalScore = res.totalScore;
      event.oracleScore = hungarian_oracle(S).total;
    }
  } else {
    const auto q = w.positions();
    std::vector<Vec3> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(pts[w.sigma.sigma[i]]);
    const AlignmentTransform T = align(q, p);
    Eigen::MatrixXd cost(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (q[i] - T.apply(pts[j])).squaredNorm();
    const HungarianResult h = hungarian_min_cost(cost);
    next.sigma = h.sigma;
    event.totalScore = event.oracleScore = h.total;
  }
  ++w.bandwidth.reassignmentRuns;
  if (w.logAssignments) {
    event.time = w.time;
    event.step = w.step;
    event.sigma = next.sigma;
    event.changed = next != w.sigma;
    event.ratio = event.oracleScore != 0.0 ? event.totalScore / event.oracleScore : 1.0;
    w.assignmentEvents.push_back(std::move(event));
  }
  if (next != w.sigma) {
    ++w.reassignmentCount;
    for (std::size_t i = 0; i < n; ++i)
      if (next.sigma[i] != w.sigma.sigma[i]) ++w.swapEvents;
    w.sigma = std::move(next);
  }
}

void step(World& w, const SimConfig& cfg) {
  const std::size_t n = w.size();
  const auto& spec = w.plan->spec;
  if (w.assignmentPending) {
    w.assignmentPending = false;
    if (cfg.assignmentMode != AssignmentMode::None) {
      reassign(w, cfg);
      w.residual = shape_residual(w);
      w.bestResidual = w.residual;
    }
  }
  const auto inv = w.sigma.inverse();
  std::normal_distribution<double> noise(0.0, cfg.noiseStd > 0.0 ? cfg.noiseStd : 1.0);

  std::vector<ControlOutput> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    ControlInput in;
    in.selfId = i;
    in.avoidance = cfg.avoidance;
    const PointIndex pi = w.sigma.sigma[i];
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) in.allRel.emplace(k, observe(w, cfg, i, k, noise));
    }
    for (PointIndex pj : spec.graph.neighbors(pi)) {
      const AgentId k = inv[pj];
      in.neighborRel.emplace(k, in.allRel.at(k));
      in.gains.emplace(k, w.plan->gains.block(pi, pj));
    }
    out[i] = compute_control(in);
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& a = w.agents[i];
    const Vec3 vWorld = rotate_z(out[i].velocity, a.yaw_offset());
    const Vec3 next = a.pose.position() + vWorld * cfg.dt;
    if (!next.allFinite()) {
      throw SimulationFaultError("agent " + std::to_string(i + 1) + " position became non-finite at step " +
                                     std::to_string(w.step + 1),
                                 w.step + 1);
    }
    a.pose.set_position(next);
    a.velocityCmd = out[i].velocity;
    a.distanceTraveled += out[i].velocity.norm() * cfg.dt;
    if (out[i].halted && !a.halted) ++w.haltEvents;
    a.halted = out[i].halted;
    const std::size_t deg = spec.graph.neighbors(w.sigma.sigma[i]).size();
    w.bandwidth.localizationMessages += deg;
    w.bandwidth.localizationBytes += deg * kPoseRecordBytes;
  }
  const double sep = min_pairwise_distance(w.positions());
  w.minSeparation = std::min(w.minSeparation, sep);
  if (cfg.avoidance.enabled && sep < cfg.avoidance.stopThreshold) ++w.safetyViolations;

  const double stepStart = w.time;
  ++w.step;
  w.time = static_cast<double>(w.step) * cfg.dt;

  const ReassignmentSchedule schedule(cfg.reassignPeriod, cfg.dt);
  if (schedule.due(w.step)) reassign(w, cfg);

  w.residual = shape_residual(w);
  double maxSpeed = 0.0;
  for (const auto& o : out) maxSpeed = std::max(maxSpeed, o.velocity.norm());
  if (w.residual < w.bestResidual - cfg.progressEpsilon) {
    w.bestResidual = w.residual;
    w.lastProgressTime = w.time;
  }
  if (!w.converged) {
    if (w.residual <= cfg.convergence.shapeTol && maxSpeed <= cfg.convergence.velEps) {
      if (!w.holdStart) w.holdStart = stepStart;
      if (w.time - *w.holdStart >= cfg.convergence.holdTime - 1e-9) {
        w.converged = true;
        w.convergenceTime = w.time;
      }
    } else {
      w.holdStart.reset();
    }
  }
}

bool detect_gridlock(const World& w, const SimConfig& cfg) {
  return !w.converged && w.time - w.lastProgressTime > cfg.gridlockTimeout;
}

double account_bandwidth(const World& w) {
  if (w.time <= 0.0 || w.size() == 0) return 0.0;
  const double total = static_cast<double>(w.bandwidth.localizationBytes + w.bandwidth.cbaaBytes);
  return total / (static_cast<double>(w.size()) * w.time);
}

TrialMetrics collect_metrics(const World& w, const SimConfig& cfg) {
  TrialMetrics m;
  m.seed = cfg.seed;
  m.success = w.converged;
  m.gridlocked = detect_gridlock(w, cfg);
  m.convergenceTime = w.converged ? w.convergenceTime : 0.0;
  m.simTime = w.time;
  m.steps = w.step;
  double dist = 0.0;
  for (const auto& a : w.agents) dist += a.distanceTraveled;
  m.meanDistanceTraveled = w.size() ? dist / static_cast<double>(w.size()) : 0.0;
  m.reassignmentCount = w.reassignmentCount;
  m.haltEvents = w.haltEvents;
  m.swapEvents = w.swapEvents;
  m.bytesPerAgentPerSecond = account_bandwidth(w);
  m.finalResidual = w.residual;
  m.minSeparation = w.minSeparation;
  m.safetyViolations = w.safetyViolations;
  m.bandwidth = w.bandwidth;
  return m;
}

namespace {

// Counter snapshot used to report per-transition deltas.
World baseline_counters(const World& w) {
  World b;
  b.agents = w.agents;
  b.bandwidth = w.bandwidth;
  b.reassignmentCount = w.reassignmentCount;
  b.haltEvents = w.haltEvents;
  b.swapEvents = w.swapEvents;
  b.safetyViolations = w.safetyViolations;
  return b;
}

}  // namespace

TrialMetrics run_until_settled(World& w, const SimConfig& cfg, const std::function<void(const World&)>& observer,
                               double stopAt) {
  const double start = w.time;
  const World before = baseline_counters(w);
  const auto maxSteps = static_cast<std::size_t>(std::llround(cfg.maxSimTime / cfg.dt));
  const std::size_t startStep = w.step;
  while (!w.converged && !detect_gridlock(w, cfg) && w.step - startStep < maxSteps &&
         w.time < stopAt - 1e-9) {
    step(w, cfg);
    if (observer) observer(w);
  }
  TrialMetrics m = collect_metrics(w, cfg);
  m.simTime = w.time - start;
  m.steps = w.step - startStep;
  if (m.success) m.convergenceTime = w.convergenceTime - start;
  double dist = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) dist += w.agents[i].distanceTraveled - before.agents[i].distanceTraveled;
  m.meanDistanceTraveled = w.size() ? dist / static_cast<double>(w.size()) : 0.0;
  m.reassignmentCount -= before.reassignmentCount;
  m.haltEvents -= before.haltEvents;
  m.swapEvents -= before.swapEvents;
  m.safetyViolations -= before.safetyViolations;
  auto& bw = m.bandwidth;
  bw.localizationMessages -= before.bandwidth.localizationMessages;
  bw.localizationBytes -= before.bandwidth.localizationBytes;
  bw.cbaaBytes -= before.bandwidth.cbaaBytes;
  bw.reassignmentRuns -= before.bandwidth.reassignmentRuns;
  bw.cbaaBytesPerLink.erase(bw.cbaaBytesPerLink.begin(),
                            bw.cbaaBytesPerLink.begin() +
                                static_cast<std::ptrdiff_t>(before.bandwidth.cbaaBytesPerLink.size()));
  m.bytesPerAgentPerSecond =
      m.simTime > 0.0 ? static_cast<double>(bw.localizationBytes + bw.cbaaBytes) /
                            (static_cast<double>(w.size()) * m.simTime)
                      : 0.0;
  return m;
}

std::vector<Vec3> seeded_initial_positions(const SimConfig& cfg, std::size_t n) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x696e6974ULL));
  return sample_initial_positions(cfg, n, rng);
}

std::vector<double> seeded_yaws(const SimConfig& cfg, std::size_t n) {
  std::vector<double> yaws(n, 0.0);
  if (!cfg.randomYaw) return yaws;
  std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x796177ULL));
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (auto& y : yaws) y = u(rng);
  return yaws;
}

TrialMetrics run_trial(const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan, const TrialOptions& opts) {
  cfg.validate();
  if (!plan) throw PreconditionError("trial needs a formation plan");
  const std::size_t n = plan->spec.size();
  const std::vector<Vec3> init = opts.initialPositions ? *opts.initialPositions : seeded_initial_positions(cfg, n);
  const std::vector<double> yaws = opts.yaws ? *opts.yaws : seeded_yaws(cfg, n);
  World w = make_world(cfg, std::move(plan), init, yaws);
  return run_until_settled(w, cfg, opts.observer);
}

}  // namespace swarmform
