#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "swarmform/formation.hpp"
#include "swarmform/gain_design.hpp"
#include "swarmform/montecarlo.hpp"
#include "swarmform/sim.hpp"

namespace swarmform {

// File formats are JSON with strict parsing: unknown fields, wrong types and
// missing required fields raise ParseError. Indices in files are 1-based.

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Formation: {"name": str, "points": [[x,y,z], ...], "edges": [[i,j], ...]}
FormationSpec parse_formation(const std::string& text);
FormationSpec load_formation(const std::filesystem::path& path);
std::string formation_to_json(const FormationSpec& spec);
// Content hash of the canonical serialization; used as the gains cache key.
std::string formation_hash(const FormationSpec& spec);

struct SolverReport {
  std::string zStatus;
  std::string xyStatus;
  std::size_t zIterations = 0;
  std::size_t xyIterations = 0;
  double zPrimalResidual = 0.0;
  double zDualResidual = 0.0;
  double xyPrimalResidual = 0.0;
  double xyDualResidual = 0.0;
  double lambdaMaxRestricted = 0.0;
  double maxNullResidual = 0.0;
  bool ok = false;
  double wallTimeSeconds = 0.0;
};

SolverReport make_solver_report(const DesignResult& result, double wallTimeSeconds);

struct GainsFile {
  std::string name;
  std::string formationHash;
  std::size_t n = 0;
  GainMatrix gains;
  SolverReport report;
};

std::string gains_to_json(const FormationSpec& spec, const GainMatrix& gains, const SolverReport& report);
// Checks that the gains match the formation size and graph when given.
GainsFile parse_gains(const std::string& text, const FormationSpec* spec = nullptr);
GainsFile load_gains(const std::filesystem::path& path, const FormationSpec* spec = nullptr);

// Overrides fields of `base`; all fields optional.
SimConfig parse_sim_config(const std::string& text, const SimConfig& base = {});
std::string sim_config_to_json(const SimConfig& cfg);

struct ScenarioEntry {
  double dispatchTime = 0.0;
  std::filesystem::path formation;
};

// {"formations": [{"time": s, "formation": path}, ...], "config": {...},
//  "start": "random" | "formation"}
// Relative paths resolve against the scenario file's directory.
// "start": "random" (default) samples initial positions from the config;
// "formation" places agent i at point i of the first formation.
struct Scenario {
  std::vector<ScenarioEntry> entries;
  SimConfig config;
  bool startAtFormation = false;
};

Scenario parse_scenario(const std::string& text, const std::filesystem::path& baseDir);
Scenario load_scenario(const std::filesystem::path& path);

MonteCarloConfig parse_montecarlo_config(const std::string& text);
MonteCarloConfig load_montecarlo_config(const std::filesystem::path& path);
std::string montecarlo_config_to_json(const MonteCarloConfig& cfg);

// Every output file starts with "# swarmform <version> <kind> fingerprint=<hex>".
std::string file_header(std::string_view kind, std::string_view fingerprint);

void write_trace_header(std::ostream& os, std::string_view fingerprint);
void write_trace_rows(std::ostream& os, const World& world);

struct TransitionRecord {
  std::size_t index = 0;
  std::string formation;
  double dispatchTime = 0.0;
  TrialMetrics metrics;
};

std::string transitions_csv(const std::vector<TransitionRecord>& rows, std::string_view fingerprint);
std::string trials_csv(const std::vector<TrialRecord>& records, std::string_view fingerprint);
std::string aggregate_csv(const std::vector<AggregateRow>& rows, std::string_view fingerprint);
std::string assignment_events_csv(const std::vector<AssignmentEvent>& events, std::string_view fingerprint);

}  // namespace swarmform
