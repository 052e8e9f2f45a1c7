#include "swarmform/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "swarmform/error.hpp"
#include "swarmform/version.hpp"

namespace swarmform {

using nlohmann::json;

namespace {

constexpr int kGainsFormatVersion = 1;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(where + ": unknown field '" + it.key() + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
  return v;
}

std::uint64_t as_uint(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ParseError(where + ": expected a non-negative integer");
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ParseError(where + ": expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

template <class F>
void optional_field(const json& j, const char* key, F&& f) {
  auto it = j.find(key);
  if (it != j.end()) f(*it, std::string(key));
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

Vec3 as_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected [x, y, z]");
  return {as_double(j[0], where), as_double(j[1], where), as_double(j[2], where)};
}

json formation_json(const FormationSpec& spec) {
  json pts = json::array();
  for (const auto& p : spec.points) pts.push_back({p.x(), p.y(), p.z()});
  json edges = json::array();
  for (const auto& e : spec.graph.edges()) edges.push_back({e.first + 1, e.second + 1});
  return {{"name", spec.name}, {"points", pts}, {"edges", edges}};
}

void parse_avoidance(const json& j, AvoidanceParams& a) {
  check_keys(j, {"enabled", "activation_radius", "stop_threshold", "max_speed"}, "avoidance");
  optional_field(j, "enabled", [&](const json& v, const std::string& k) { a.enabled = as_bool(v, k); });
  optional_field(j, "activation_radius",
                 [&](const json& v, const std::string& k) { a.activationRadius = as_double(v, k); });
  optional_field(j, "stop_threshold", [&](const json& v, const std::string& k) { a.stopThreshold = as_double(v, k); });
  optional_field(j, "max_speed", [&](const json& v, const std::string& k) { a.maxSpeed = as_double(v, k); });
}

std::pair<double, double> as_pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected a two-element array");
  return {as_double(j[0], where), as_double(j[1], where)};
}

void apply_sim_config(const json& j, SimConfig& c) {
  check_keys(j,
             {"dt", "max_sim_time", "gridlock_timeout", "reassign_period", "noise_std", "init_area", "init_altitude",
              "min_init_separation", "convergence", "seed", "assignment_mode", "avoidance", "random_yaw",
              "progress_epsilon"},
             "sim config");
  optional_field(j, "dt", [&](const json& v, const std::string& k) { c.dt = as_double(v, k); });
  optional_field(j, "max_sim_time", [&](const json& v, const std::string& k) { c.maxSimTime = as_double(v, k); });
  optional_field(j, "gridlock_timeout",
                 [&](const json& v, const std::string& k) { c.gridlockTimeout = as_double(v, k); });
  optional_field(j, "reassign_period", [&](const json& v, const std::string& k) { c.reassignPeriod = as_double(v, k); });
  optional_field(j, "noise_std", [&](const json& v, const std::string& k) { c.noiseStd = as_double(v, k); });
  optional_field(j, "init_area", [&](const json& v, const std::string& k) {
    std::tie(c.initAreaX, c.initAreaY) = as_pair(v, k);
  });
  optional_field(j, "init_altitude", [&](const json& v, const std::string& k) {
    std::tie(c.initAltitudeMin, c.initAltitudeMax) = as_pair(v, k);
  });
  optional_field(j, "min_init_separation",
                 [&](const json& v, const std::string& k) { c.minInitSeparation = as_double(v, k); });
  optional_field(j, "convergence", [&](const json& v, const std::string&) {
    check_keys(v, {"shape_tol", "vel_eps", "hold_time"}, "convergence");
    optional_field(v, "shape_tol", [&](const json& x, const std::string& k) { c.convergence.shapeTol = as_double(x, k); });
    optional_field(v, "vel_eps", [&](const json& x, const std::string& k) { c.convergence.velEps = as_double(x, k); });
    optional_field(v, "hold_time", [&](const json& x, const std::string& k) { c.convergence.holdTime = as_double(x, k); });
  });
  optional_field(j, "seed", [&](const json& v, const std::string& k) { c.seed = as_uint(v, k); });
  optional_field(j, "assignment_mode", [&](const json& v, const std::string& k) {
    try {
      c.assignmentMode = parse_assignment_mode(as_string(v, k));
    } catch (const PreconditionError& e) {
      throw ParseError(std::string("assignment_mode: ") + e.what());
    }
  });
  optional_field(j, "avoidance", [&](const json& v, const std::string&) { parse_avoidance(v, c.avoidance); });
  optional_field(j, "random_yaw", [&](const json& v, const std::string& k) { c.randomYaw = as_bool(v, k); });
  optional_field(j, "progress_epsilon",
                 [&](const json& v, const std::string& k) { c.progressEpsilon = as_double(v, k); });
  try {
    c.validate();
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("sim config: ") + e.what());
  }
}

json sim_config_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"max_sim_time", c.maxSimTime},
          {"gridlock_timeout", c.gridlockTimeout},
          {"reassign_period", c.reassignPeriod},
          {"noise_std", c.noiseStd},
          {"init_area", {c.initAreaX, c.initAreaY}},
          {"init_altitude", {c.initAltitudeMin, c.initAltitudeMax}},
          {"min_init_separation", c.minInitSeparation},
          {"convergence",
           {{"shape_tol", c.convergence.shapeTol},
            {"vel_eps", c.convergence.velEps},
            {"hold_time", c.convergence.holdTime}}},
          {"seed", c.seed},
          {"assignment_mode", to_string(c.assignmentMode)},
          {"avoidance",
           {{"enabled", c.avoidance.enabled},
            {"activation_radius", c.avoidance.activationRadius},
            {"stop_threshold", c.avoidance.stopThreshold},
            {"max_speed", c.avoidance.maxSpeed}}},
          {"random_yaw", c.randomYaw},
          {"progress_epsilon", c.progressEpsilon}};
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

FormationSpec parse_formation(const std::string& text) {
  const json j = parse_json(text, "formation");
  check_keys(j, {"name", "points", "edges", "complete"}, "formation");
  std::string name = "formation";
  optional_field(j, "name", [&](const json& v, const std::string& k) { name = as_string(v, k); });
  const json& pts = require(j, "points", "formation");
  if (!pts.is_array()) throw ParseError("formation: 'points' must be an array");
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < pts.size(); ++i) points.push_back(as_point(pts[i], fmt::format("point {}", i + 1)));

  bool complete = false;
  optional_field(j, "complete", [&](const json& v, const std::string& k) { complete = as_bool(v, k); });
  std::vector<Edge> edges;
  if (complete) {
    if (j.contains("edges")) throw ParseError("formation: 'edges' and 'complete' are exclusive");
    for (std::size_t a = 0; a < points.size(); ++a)
      for (std::size_t b = a + 1; b < points.size(); ++b) edges.push_back({a, b});
  } else {
    const json& es = require(j, "edges", "formation");
    if (!es.is_array()) throw ParseError("formation: 'edges' must be an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string where = fmt::format("edge {}", i + 1);
      if (!es[i].is_array() || es[i].size() != 2) throw ParseError(where + ": expected [i, j]");
      const auto a = as_uint(es[i][0], where);
      const auto b = as_uint(es[i][1], where);
      if (a < 1 || b < 1 || a > points.size() || b > points.size())
        throw InvalidFormationError(where + ": vertex index out of range (indices are 1-based)");
      edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
    }
  }
  return FormationSpec::make(name, std::move(points), edges);
}

FormationSpec load_formation(const std::filesystem::path& path) { return parse_formation(read_text_file(path)); }

std::string formation_to_json(const FormationSpec& spec) { return formation_json(spec).dump(2) + "\n"; }

std::string formation_hash(const FormationSpec& spec) {
  // The name does not change the gains.
  json j = formation_json(spec);
  j.erase("name");
  return hex64(fnv1a64(j.dump()));
}

SolverReport make_solver_report(const DesignResult& r, double wallTimeSeconds) {
  SolverReport s;
  s.zStatus = to_string(r.z.status);
  s.xyStatus = to_string(r.xy.status);
  s.zIterations = r.z.iterations;
  s.xyIterations = r.xy.iterations;
  s.zPrimalResidual = r.z.primalResidual;
  s.zDualResidual = r.z.dualResidual;
  s.xyPrimalResidual = r.xy.primalResidual;
  s.xyDualResidual = r.xy.dualResidual;
  s.lambdaMaxRestricted = r.report.lambdaMaxRestricted;
  s.maxNullResidual = r.report.maxNullResidual;
  s.ok = r.ok;
  s.wallTimeSeconds = wallTimeSeconds;
  return s;
}

std::string gains_to_json(const FormationSpec& spec, const GainMatrix& gains, const SolverReport& rep) {
  json blocks = json::array();
  for (const auto& [e, blk] : gains.blocks()) blocks.push_back({e.first + 1, e.second + 1, blk.a, blk.b, blk.c});
  json report = {{"z_status", rep.zStatus},
                 {"xy_status", rep.xyStatus},
                 {"z_iterations", rep.zIterations},
                 {"xy_iterations", rep.xyIterations},
                 {"z_primal_residual", rep.zPrimalResidual},
                 {"z_dual_residual", rep.zDualResidual},
                 {"xy_primal_residual", rep.xyPrimalResidual},
                 {"xy_dual_residual", rep.xyDualResidual},
                 {"lambda_max_restricted", rep.lambdaMaxRestricted},
                 {"max_null_residual", rep.maxNullResidual},
                 {"ok", rep.ok},
                 {"wall_time_s", rep.wallTimeSeconds}};
  json j = {{"format", "swarmform-gains"},
            {"version", kGainsFormatVersion},
            {"name", spec.name},
            {"formation_hash", formation_hash(spec)},
            {"n", spec.size()},
            {"blocks", blocks},
            {"report", report}};
  return j.dump(2) + "\n";
}

GainsFile parse_gains(const std::string& text, const FormationSpec* spec) {
  const json j = parse_json(text, "gains");
  check_keys(j, {"format", "version", "name", "formation_hash", "n", "blocks", "report"}, "gains");
  if (as_string(require(j, "format", "gains"), "format") != "swarmform-gains")
    throw ParseError("gains: unexpected format tag");
  if (as_uint(require(j, "version", "gains"), "version") != kGainsFormatVersion)
    throw ParseError("gains: unsupported version");
  GainsFile g;
  optional_field(j, "name", [&](const json& v, const std::string& k) { g.name = as_string(v, k); });
  optional_field(j, "formation_hash", [&](const json& v, const std::string& k) { g.formationHash = as_string(v, k); });
  g.n = static_cast<std::size_t>(as_uint(require(j, "n", "gains"), "n"));
  g.gains = GainMatrix(g.n);
  const json& bl = require(j, "blocks", "gains");
  if (!bl.is_array()) throw ParseError("gains: 'blocks' must be an array");
  for (std::size_t i = 0; i < bl.size(); ++i) {
    const std::string where = fmt::format("block {}", i + 1);
    if (!bl[i].is_array() || bl[i].size() != 5) throw ParseError(where + ": expected [i, j, a, b, c]");
    const auto a = as_uint(bl[i][0], where);
    const auto b = as_uint(bl[i][1], where);
    if (a < 1 || b < 1 || a > g.n || b > g.n || a == b) throw ParseError(where + ": bad agent indices");
    g.gains.set(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1),
                GainBlock{as_double(bl[i][2], where), as_double(bl[i][3], where), as_double(bl[i][4], where)});
  }
  optional_field(j, "report", [&](const json& r, const std::string&) {
    check_keys(r,
               {"z_status", "xy_status", "z_iterations", "xy_iterations", "z_primal_residual", "z_dual_residual",
                "xy_primal_residual", "xy_dual_residual", "lambda_max_restricted", "max_null_residual", "ok",
                "wall_time_s"},
               "gains report");
    auto& s = g.report;
    optional_field(r, "z_status", [&](const json& v, const std::string& k) { s.zStatus = as_string(v, k); });
    optional_field(r, "xy_status", [&](const json& v, const std::string& k) { s.xyStatus = as_string(v, k); });
    optional_field(r, "z_iterations", [&](const json& v, const std::string& k) { s.zIterations = as_uint(v, k); });
    optional_field(r, "xy_iterations", [&](const json& v, const std::string& k) { s.xyIterations = as_uint(v, k); });
    optional_field(r, "z_primal_residual",
                   [&](const json& v, const std::string& k) { s.zPrimalResidual = as_double(v, k); });
    optional_field(r, "z_dual_residual", [&](const json& v, const std::string& k) { s.zDualResidual = as_double(v, k); });
    optional_field(r, "xy_primal_residual",
                   [&](const json& v, const std::string& k) { s.xyPrimalResidual = as_double(v, k); });
    optional_field(r, "xy_dual_residual",
                   [&](const json& v, const std::string& k) { s.xyDualResidual = as_double(v, k); });
    optional_field(r, "lambda_max_restricted",
                   [&](const json& v, const std::string& k) { s.lambdaMaxRestricted = as_double(v, k); });
    optional_field(r, "max_null_residual",
                   [&](const json& v, const std::string& k) { s.maxNullResidual = as_double(v, k); });
    optional_field(r, "ok", [&](const json& v, const std::string& k) { s.ok = as_bool(v, k); });
    optional_field(r, "wall_time_s", [&](const json& v, const std::string& k) { s.wallTimeSeconds = as_double(v, k); });
  });

  if (spec) {
    if (g.n != spec->size()) throw ParseError("gains: size does not match the formation");
    std::set<Edge> have;
    for (const auto& [e, blk] : g.gains.blocks()) have.insert(Edge{e.first, e.second});
    const auto want = spec->graph.edges();
    if (have != std::set<Edge>(want.begin(), want.end()))
      throw ParseError("gains: block pattern does not match the formation graph");
  }
  return g;
}

GainsFile load_gains(const std::filesystem::path& path, const FormationSpec* spec) {
  return parse_gains(read_text_file(path), spec);
}

SimConfig parse_sim_config(const std::string& text, const SimConfig& base) {
  SimConfig c = base;
  apply_sim_config(parse_json(text, "sim config"), c);
  return c;
}

std::string sim_config_to_json(const SimConfig& cfg) { return sim_config_json(cfg).dump(2) + "\n"; }

Scenario parse_scenario(const std::string& text, const std::filesystem::path& baseDir) {
  const json j = parse_json(text, "scenario");
  check_keys(j, {"formations", "config", "start"}, "scenario");
  Scenario sc;
  optional_field(j, "start", [&](const json& v, const std::string& k) {
    const std::string s = as_string(v, k);
    if (s == "formation")
      sc.startAtFormation = true;
    else if (s != "random")
      throw ParseError("scenario: start must be 'random' or 'formation'");
  });
  optional_field(j, "config", [&](const json& v, const std::string&) { apply_sim_config(v, sc.config); });
  const json& fs = require(j, "formations", "scenario");
  if (!fs.is_array() || fs.empty()) throw ParseError("scenario: 'formations' must be a non-empty array");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string where = fmt::format("scenario entry {}", i + 1);
    check_keys(fs[i], {"time", "formation"}, where);
    ScenarioEntry e;
    e.dispatchTime = as_double(require(fs[i], "time", where), where + " time");
    std::filesystem::path p = as_string(require(fs[i], "formation", where), where + " formation");
    e.formation = p.is_absolute() ? p : baseDir / p;
    if (i == 0 && e.dispatchTime != 0.0) throw ParseError("scenario: first dispatch must be at t = 0");
    if (i > 0 && !(e.dispatchTime > sc.entries.back().dispatchTime))
      throw ParseError(where + ": dispatch times must be strictly increasing");
    sc.entries.push_back(std::move(e));
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path());
}

MonteCarloConfig parse_montecarlo_config(const std::string& text) {
  const json j = parse_json(text, "montecarlo config");
  check_keys(j, {"trials", "master_seed", "modes", "graphs", "threads", "sim", "generator"}, "montecarlo config");
  MonteCarloConfig c;
  optional_field(j, "trials", [&](const json& v, const std::string& k) { c.trials = as_uint(v, k); });
  optional_field(j, "master_seed", [&](const json& v, const std::string& k) { c.masterSeed = as_uint(v, k); });
  optional_field(j, "threads", [&](const json& v, const std::string& k) { c.threads = as_uint(v, k); });
  optional_field(j, "modes", [&](const json& v, const std::string& k) {
    if (!v.is_array() || v.empty()) throw ParseError(k + ": expected a non-empty array");
    c.modes.clear();
    for (const auto& m : v) {
      try {
        c.modes.push_back(parse_assignment_mode(as_string(m, k)));
      } catch (const PreconditionError& e) {
        throw ParseError(k + ": " + e.what());
      }
    }
  });
  optional_field(j, "graphs", [&](const json& v, const std::string& k) {
    if (!v.is_array() || v.empty()) throw ParseError(k + ": expected a non-empty array");
    c.graphs.clear();
    for (const auto& g : v) {
      try {
        c.graphs.push_back(parse_graph_kind(as_string(g, k)));
      } catch (const PreconditionError& e) {
        throw ParseError(k + ": " + e.what());
      }
    }
  });
  optional_field(j, "sim", [&](const json& v, const std::string&) { apply_sim_config(v, c.sim); });
  optional_field(j, "generator", [&](const json& v, const std::string&) {
    check_keys(v, {"n", "volume", "min_spacing", "edge_density", "max_design_attempts"}, "generator");
    auto& g = c.generator;
    optional_field(v, "n", [&](const json& x, const std::string& k) { g.n = as_uint(x, k); });
    optional_field(v, "volume", [&](const json& x, const std::string& k) {
      if (!x.is_array() || x.size() != 3) throw ParseError(k + ": expected [x, y, z]");
      g.volumeX = as_double(x[0], k);
      g.volumeY = as_double(x[1], k);
      g.volumeZ = as_double(x[2], k);
    });
    optional_field(v, "min_spacing", [&](const json& x, const std::string& k) { g.minSpacing = as_double(x, k); });
    optional_field(v, "edge_density", [&](const json& x, const std::string& k) { g.edgeDensity = as_double(x, k); });
    optional_field(v, "max_design_attempts",
                   [&](const json& x, const std::string& k) { g.maxDesignAttempts = as_uint(x, k); });
    if (g.n < 3) throw ParseError("generator: n must be at least 3");
    if (!(g.edgeDensity > 0.0 && g.edgeDensity <= 1.0)) throw ParseError("generator: edge_density must be in (0, 1]");
  });
  if (c.trials == 0) throw ParseError("montecarlo config: trials must be positive");
  return c;
}

MonteCarloConfig load_montecarlo_config(const std::filesystem::path& path) {
  return parse_montecarlo_config(read_text_file(path));
}

std::string montecarlo_config_to_json(const MonteCarloConfig& c) {
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  json graphs = json::array();
  for (auto g : c.graphs) graphs.push_back(to_string(g));
  const auto& g = c.generator;
  json j = {{"trials", c.trials},
            {"master_seed", c.masterSeed},
            {"modes", modes},
            {"graphs", graphs},
            {"sim", sim_config_json(c.sim)},
            {"generator",
             {{"n", g.n},
              {"volume", {g.volumeX, g.volumeY, g.volumeZ}},
              {"min_spacing", g.minSpacing},
              {"edge_density", g.edgeDensity},
              {"max_design_attempts", g.maxDesignAttempts}}}};
  return j.dump(2) + "\n";
}

std::string file_header(std::string_view kind, std::string_view fingerprint) {
  return fmt::format("# swarmform {} {} fingerprint={}\n", kVersion, kind, fingerprint);
}

void write_trace_header(std::ostream& os, std::string_view fingerprint) {
  os << file_header("trace", fingerprint);
  os << "step,time,agent,x,y,z,vx,vy,vz,halted,point\n";
}

void write_trace_rows(std::ostream& os, const World& w) {
  for (const auto& a : w.agents) {
    const Vec3 p = a.pose.position();
    const Vec3 v = rotate_z(a.velocityCmd, a.pose.yaw());
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", w.step, num(w.time), a.id + 1, num(p.x()), num(p.y()),
                      num(p.z()), num(v.x()), num(v.y()), num(v.z()), a.halted ? 1 : 0, w.sigma.sigma[a.id] + 1);
  }
}

namespace {

std::string metrics_columns() {
  return "seed,success,gridlocked,distance_m,convergence_time_s,sim_time_s,steps,reassignments,swaps,halts,"
         "bytes_per_agent_s,final_residual,min_separation_m,safety_violations";
}

std::string metrics_values(const TrialMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", m.seed, m.success ? 1 : 0, m.gridlocked ? 1 : 0,
                     num(m.meanDistanceTraveled), num(m.convergenceTime), num(m.simTime), m.steps,
                     m.reassignmentCount, m.swapEvents, m.haltEvents, num(m.bytesPerAgentPerSecond),
                     num(m.finalResidual), num(m.minSeparation), m.safetyViolations);
}

}  // namespace

std::string transitions_csv(const std::vector<TransitionRecord>& rows, std::string_view fingerprint) {
  std::string out = file_header("transitions", fingerprint);
  out += "transition,formation,dispatch_time_s," + metrics_columns() + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{}\n", r.index + 1, r.formation, num(r.dispatchTime), metrics_values(r.metrics));
  return out;
}

std::string trials_csv(const std::vector<TrialRecord>& records, std::string_view fingerprint) {
  std::string out = file_header("trials", fingerprint);
  out += "trial,graph,mode," + metrics_columns() + "\n";
  for (const auto& r : records)
    out += fmt::format("{},{},{},{}\n", r.trial + 1, to_string(r.graph), to_string(r.mode), metrics_values(r.metrics));
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows, std::string_view fingerprint) {
  std::string out = file_header("aggregate", fingerprint);
  out +=
      "graph,mode,trials,successes,success_pct,distance_mean_m,distance_std_m,time_mean_s,time_std_s,"
      "reassignments_mean,swaps_mean,halts_mean,bytes_per_agent_s_mean,safety_violations,min_separation_m\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.graph), to_string(r.mode),
                       r.trials, r.successes, num(100.0 * r.successRate), num(r.distanceMean), num(r.distanceStd),
                       num(r.timeMean), num(r.timeStd), num(r.reassignmentMean), num(r.swapMean), num(r.haltMean),
                       num(r.bytesPerAgentPerSecondMean), r.safetyViolations, num(r.minSeparation));
  }
  return out;
}

std::string assignment_events_csv(const std::vector<AssignmentEvent>& events, std::string_view fingerprint) {
  std::string out = file_header("assignments", fingerprint);
  out += "step,time,rounds,total_score,oracle_score,ratio,changed,sigma\n";
  for (const auto& e : events) {
    std::string sig;
    for (std::size_t i = 0; i < e.sigma.size(); ++i) sig += fmt::format("{}{}", i ? " " : "", e.sigma[i] + 1);
    out += fmt::format("{},{},{},{},{},{},{},{}\n", e.step, num(e.time), e.rounds, num(e.totalScore),
                       num(e.oracleScore), num(e.ratio), e.changed ? 1 : 0, sig);
  }
  return out;
}

}  // namespace swarmform
