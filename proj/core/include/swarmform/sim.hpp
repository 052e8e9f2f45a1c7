#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swarmform/assignment.hpp"
#include "swarmform/controller.hpp"
#include "swarmform/formation.hpp"

namespace swarmform {

enum class AssignmentMode { None, Cbaa, Hungarian };

std::string to_string(AssignmentMode m);
// Accepts none/cbaa/hungarian and the table labels NA/A/H.
AssignmentMode parse_assignment_mode(const std::string& s);

struct ConvergenceParams {
  // Relative shape residual.
  double shapeTol = 0.03;
  double velEps = 0.1;
  double holdTime = 1.0;
};

struct SimConfig {
  double dt = 0.05;
  double maxSimTime = 120.0;
  double gridlockTimeout = 30.0;
  double reassignPeriod = 2.0;
  double noiseStd = 0.02;
  double initAreaX = 12.0;
  double initAreaY = 12.0;
  double initAltitudeMin = 1.0;
  double initAltitudeMax = 3.0;
  double minInitSeparation = 1.5;
  ConvergenceParams convergence;
  std::uint64_t seed = 1;
  AssignmentMode assignmentMode = AssignmentMode::Cbaa;
  AvoidanceParams avoidance;
  // Draw a fixed yaw offset per agent, otherwise all body frames match world.
  bool randomYaw = true;
  // Minimum residual decrease that counts as progress for gridlock detection.
  double progressEpsilon = 1e-3;

  // Throws PreconditionError.
  void validate() const;
};

// Formation with its designed gains and null basis.
struct FormationPlan {
  FormationSpec spec;
  GainMatrix gains;
  NullBasis basis;

  static std::shared_ptr<const FormationPlan> make(FormationSpec spec, GainMatrix gains);
};

struct AgentState {
  AgentId id = 0;
  Pose pose;
  Vec3 velocityCmd = Vec3::Zero();
  double distanceTraveled = 0.0;
  bool halted = false;

  double yaw_offset() const { return pose.yaw(); }
};

// Bytes of one localization record (a 3D position, 64-bit components).
inline constexpr std::size_t kPoseRecordBytes = 24;

struct BandwidthCounters {
  std::size_t localizationMessages = 0;
  std::size_t localizationBytes = 0;
  std::size_t cbaaBytes = 0;
  std::size_t reassignmentRuns = 0;
  // Bytes per directed link for each CBAA run.
  std::vector<std::size_t> cbaaBytesPerLink;
};

// One reassignment run. For CBAA the oracle is the Hungarian optimum on the
// same scores; for Hungarian mode both totals are alignment costs.
struct AssignmentEvent {
  double time = 0.0;
  std::size_t step = 0;
  std::size_t rounds = 0;
  std::vector<PointIndex> sigma;
  double totalScore = 0.0;
  double oracleScore = 0.0;
  double ratio = 1.0;
  bool changed = false;
};

struct World {
  double time = 0.0;
  std::size_t step = 0;
  std::vector<AgentState> agents;
  AssignmentMap sigma;
  std::shared_ptr<const FormationPlan> plan;
  // Set when a formation is dispatched; the next step assigns before moving.
  bool assignmentPending = true;
  std::mt19937_64 noiseRng;

  // Convergence and gridlock bookkeeping.
  double residual = 0.0;
  double bestResidual = 0.0;
  double lastProgressTime = 0.0;
  std::optional<double> holdStart;
  bool converged = false;
  double convergenceTime = 0.0;

  BandwidthCounters bandwidth;
  std::size_t reassignmentCount = 0;
  std::size_t swapEvents = 0;
  std::size_t haltEvents = 0;
  double minSeparation = 0.0;
  std::size_t safetyViolations = 0;

  bool logAssignments = false;
  std::vector<AssignmentEvent> assignmentEvents;

  std::size_t size() const { return agents.size(); }
  std::vector<Vec3> positions() const;
};

// Positions in the init area (centered on the origin) with pairwise
// separation >= minInitSeparation. Throws InfeasibleDensityError after 1e5
// rejected draws.
std::vector<Vec3> sample_initial_positions(const SimConfig& cfg, std::size_t n, std::mt19937_64& rng);

World make_world(const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan, const std::vector<Vec3>& positions,
                 const std::vector<double>& yaws);

// Switches the desired formation. The assignment restarts from identity and,
// unless the mode is none, is recomputed before the next step moves anyone.
void dispatch_formation(World& world, const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan);

// Agents adjacent under the current assignment.
Graph communication_graph(const World& world);

// |Q^T q'| / |q' - mean| with q' the positions ordered by formation point.
double shape_residual(const World& world);

// One synchronous round: observe, control, integrate, account, reassign.
// Throws SimulationFaultError on non-finite state.
void step(World& world, const SimConfig& cfg);

// Runs align -> score -> assignment for the configured mode and swaps in the
// result.
void reassign(World& world, const SimConfig& cfg);

bool detect_gridlock(const World& world, const SimConfig& cfg);

struct TrialMetrics {
  std::uint64_t seed = 0;
  bool success = false;
  bool gridlocked = false;
  double convergenceTime = 0.0;
  double simTime = 0.0;
  std::size_t steps = 0;
  double meanDistanceTraveled = 0.0;
  std::size_t reassignmentCount = 0;
  std::size_t haltEvents = 0;
  std::size_t swapEvents = 0;
  double bytesPerAgentPerSecond = 0.0;
  double finalResidual = 0.0;
  double minSeparation = 0.0;
  std::size_t safetyViolations = 0;
  BandwidthCounters bandwidth;
};

struct TrialOptions {
  std::optional<std::vector<Vec3>> initialPositions;
  std::optional<std::vector<double>> yaws;
  // Called after every step.
  std::function<void(const World&)> observer;
};

TrialMetrics collect_metrics(const World& world, const SimConfig& cfg);
double account_bandwidth(const World& world);

// Initial positions and yaw offsets drawn from streams derived from cfg.seed.
std::vector<Vec3> seeded_initial_positions(const SimConfig& cfg, std::size_t n);
std::vector<double> seeded_yaws(const SimConfig& cfg, std::size_t n);

TrialMetrics run_trial(const SimConfig& cfg, std::shared_ptr<const FormationPlan> plan, const TrialOptions& opts = {});

// Runs an existing world until convergence, gridlock, maxSimTime measured
// from the world's current time, or the absolute time stopAt. Counters in
// the result cover only this run.
TrialMetrics run_until_settled(World& world, const SimConfig& cfg, const std::function<void(const World&)>& observer,
                               double stopAt = std::numeric_limits<double>::infinity());

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace swarmform
