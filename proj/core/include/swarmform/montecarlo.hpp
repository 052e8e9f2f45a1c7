#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "swarmform/gain_design.hpp"
#include "swarmform/sim.hpp"

namespace swarmform {

enum class GraphKind { Complete, NonComplete };

std::string to_string(GraphKind g);
GraphKind parse_graph_kind(const std::string& s);

// Random formations in a box with a minimum point spacing.
struct FormationGenerator {
  std::size_t n = 10;
  double volumeX = 9.0;
  double volumeY = 9.0;
  double volumeZ = 2.0;
  double minSpacing = 2.0;
  // Edge probability for non-complete graphs.
  double edgeDensity = 0.6;
  // Graph redraws allowed when the designed gains fail verification.
  std::size_t maxDesignAttempts = 20;
  DesignOptions design;
};

std::vector<Vec3> random_formation_points(const FormationGenerator& gen, std::mt19937_64& rng);

// Draws a formation for the given seed and designs its gains. Throws
// InfeasibleDensityError if points cannot be placed and NumericalFailureError
// if no drawn graph yields verified gains.
std::shared_ptr<const FormationPlan> generate_formation(const FormationGenerator& gen, GraphKind kind,
                                                        std::uint64_t seed);

struct MonteCarloConfig {
  SimConfig sim;
  FormationGenerator generator;
  std::size_t trials = 50;
  std::uint64_t masterSeed = 1;
  std::vector<AssignmentMode> modes{AssignmentMode::None, AssignmentMode::Cbaa, AssignmentMode::Hungarian};
  std::vector<GraphKind> graphs{GraphKind::Complete, GraphKind::NonComplete};
  std::size_t threads = 1;
};

struct TrialRecord {
  std::size_t trial = 0;
  GraphKind graph = GraphKind::Complete;
  AssignmentMode mode = AssignmentMode::None;
  TrialMetrics metrics;
};

// One aggregate row per graph kind and mode. Distance and time statistics cover successful trials.
struct AggregateRow {
  GraphKind graph = GraphKind::Complete;
  AssignmentMode mode = AssignmentMode::None;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double successRate = 0.0;
  double distanceMean = 0.0;
  double distanceStd = 0.0;
  double timeMean = 0.0;
  double timeStd = 0.0;
  double reassignmentMean = 0.0;
  double swapMean = 0.0;
  double haltMean = 0.0;
  double bytesPerAgentPerSecondMean = 0.0;
  std::size_t safetyViolations = 0;
  double minSeparation = 0.0;
};

struct MonteCarloResult {
  // Ordered by trial, then graph kind, then mode.
  std::vector<TrialRecord> records;
  std::vector<AggregateRow> rows;
};

std::uint64_t trial_seed(std::uint64_t masterSeed, std::size_t trial);

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg);

// Paired bootstrap over trials: fraction of resamples in which the success
// count of `a` exceeds (or, with strict = false, is at least) that of `b`.
double bootstrap_confidence(const std::vector<bool>& a, const std::vector<bool>& b, bool strict,
                            std::size_t resamples = 10000, std::uint64_t seed = 12345);

}  // namespace swarmform
