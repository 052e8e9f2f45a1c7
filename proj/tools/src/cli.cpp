#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "swarmform/error.hpp"
#include "swarmform/gain_design.hpp"
#include "swarmform/io.hpp"
#include "swarmform/montecarlo.hpp"
#include "swarmform/sim.hpp"
#include "swarmform/version.hpp"

namespace swarmform::cli {

namespace fs = std::filesystem;

namespace {

struct SolverFlags {
  double mu = AdmmOptions{}.mu;
  std::size_t maxIter = AdmmOptions{}.maxIter;
  double tol = AdmmOptions{}.tolPrimal;

  DesignOptions options() const {
    DesignOptions o;
    o.admm.mu = mu;
    o.admm.maxIter = maxIter;
    o.admm.tolPrimal = tol;
    o.admm.tolDual = tol;
    return o;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--mu", f.mu, "Initial ADMM penalty")->capture_default_str();
  cmd->add_option("--max-iter", f.maxIter, "ADMM iteration cap")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Relative primal and dual tolerance")->capture_default_str();
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SWARMFORM_OUTPUT_DIR"); env && *env) return env;
  return "swarmform-out";
}

fs::path cache_path(const fs::path& dir, const FormationSpec& spec) { return dir / (formation_hash(spec) + ".json"); }

void print_report(std::ostream& os, const SolverReport& r) {
  os << fmt::format("z:  {} after {} iterations (primal {:.3e}, dual {:.3e})\n", r.zStatus, r.zIterations,
                    r.zPrimalResidual, r.zDualResidual);
  os << fmt::format("xy: {} after {} iterations (primal {:.3e}, dual {:.3e})\n", r.xyStatus, r.xyIterations,
                    r.xyPrimalResidual, r.xyDualResidual);
  os << fmt::format("lambda_max(Q^T A Q) = {:.6g}, max |A N| = {:.3e}, wall time {:.3f} s\n", r.lambdaMaxRestricted,
                    r.maxNullResidual, r.wallTimeSeconds);
}

struct Designed {
  DesignResult result;
  SolverReport report;
};

Designed design(const FormationSpec& spec, const DesignOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Designed d;
  d.result = design_gains(spec, opts);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  d.report = make_solver_report(d.result, wall);
  return d;
}

// design-gains

struct DesignArgs {
  std::string formation;
  std::string out;
  std::string outDir;
  SolverFlags solver;
};

int cmd_design_gains(const DesignArgs& a, std::ostream& out, std::ostream& err) {
  const FormationSpec spec = load_formation(a.formation);
  const Designed d = design(spec, a.solver.options());
  print_report(d.result.ok ? out : err, d.report);
  if (!d.result.ok) {
    err << "gain design failed verification; no gains written\n";
    return kNumericalFailure;
  }
  const fs::path dest = a.out.empty() ? cache_path(output_dir(a.outDir) / "gains", spec) : fs::path(a.out);
  write_text_file(dest, gains_to_json(spec, d.result.gains, d.report));
  out << "wrote " << dest.string() << "\n";
  return kOk;
}

// verify-gains

struct VerifyArgs {
  std::string formation;
  std::string gains;
};

int cmd_verify_gains(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const FormationSpec spec = load_formation(a.formation);
  const GainsFile g = load_gains(a.gains, &spec);
  const GainReport r = verify_gain(g.gains, build_null_basis(spec));
  std::ostream& os = r.ok ? out : err;
  os << fmt::format("n = {}, blocks = {}\n", g.n, g.gains.blocks().size());
  os << fmt::format("lambda_max(Q^T A Q) = {:.6g}\nmax |A N| = {:.3e}\nsymmetry error = {:.3e}\n", r.lambdaMaxRestricted,
                    r.maxNullResidual, r.symmetryError);
  os << (r.ok ? "ok\n" : "gains fail verification\n");
  return r.ok ? kOk : kNumericalFailure;
}

// simulate

struct SimulateArgs {
  std::string scenario;
  std::string gainsDir;
  std::string outDir;
  std::string assignment;
  std::optional<std::uint64_t> seed;
  bool design = false;
  bool trace = false;
  bool assignmentTrace = false;
  SolverFlags solver;
};

struct LoadedFormation {
  FormationSpec spec;
  std::string hash;
  std::shared_ptr<const FormationPlan> plan;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a.scenario);
  SimConfig cfg = sc.config;
  if (!a.assignment.empty()) {
    try {
      cfg.assignmentMode = parse_assignment_mode(a.assignment);
    } catch (const PreconditionError& e) {
      throw ParseError(std::string("--assignment: ") + e.what());
    }
  }
  if (a.seed) cfg.seed = *a.seed;

  const fs::path outDir = output_dir(a.outDir);
  const fs::path gainsDir = a.gainsDir.empty() ? outDir / "gains" : fs::path(a.gainsDir);

  std::vector<LoadedFormation> forms;
  std::map<std::string, std::shared_ptr<const FormationPlan>> byHash;
  for (const auto& e : sc.entries) {
    LoadedFormation lf{load_formation(e.formation), {}, {}};
    lf.hash = formation_hash(lf.spec);
    if (!forms.empty() && lf.spec.size() != forms.front().spec.size())
      throw ParseError("scenario: all formations must have the same number of agents");
    if (auto it = byHash.find(lf.hash); it != byHash.end()) {
      lf.plan = it->second;
    } else {
      const fs::path cached = cache_path(gainsDir, lf.spec);
      GainMatrix gains;
      if (fs::exists(cached)) {
        gains = load_gains(cached, &lf.spec).gains;
      } else if (a.design) {
        const Designed d = design(lf.spec, a.solver.options());
        if (!d.result.ok) {
          print_report(err, d.report);
          err << "gain design failed for " << e.formation.string() << "\n";
          return kNumericalFailure;
        }
        write_text_file(cached, gains_to_json(lf.spec, d.result.gains, d.report));
        gains = d.result.gains;
      } else {
        err << "missing gains for " << e.formation.string() << " (expected " << cached.string()
            << "); run design-gains or pass --design\n";
        return kInputError;
      }
      lf.plan = FormationPlan::make(lf.spec, std::move(gains));
      byHash.emplace(lf.hash, lf.plan);
    }
    forms.push_back(std::move(lf));
  }

  nlohmann::json fp = {{"command", "simulate"},
                       {"config", nlohmann::json::parse(sim_config_to_json(cfg))},
                       {"start", sc.startAtFormation ? "formation" : "random"}};
  for (std::size_t i = 0; i < forms.size(); ++i)
    fp["formations"].push_back({{"time", sc.entries[i].dispatchTime}, {"hash", forms[i].hash}});
  const std::string fingerprint = hex64(fnv1a64(fp.dump()));

  const std::size_t n = forms.front().spec.size();
  const std::vector<Vec3> init = sc.startAtFormation ? forms.front().spec.points : seeded_initial_positions(cfg, n);
  World w = make_world(cfg, forms.front().plan, init, seeded_yaws(cfg, n));
  w.logAssignments = a.assignmentTrace;

  std::ostringstream trace;
  if (a.trace) {
    write_trace_header(trace, fingerprint);
    write_trace_rows(trace, w);
  }
  const std::function<void(const World&)> observer = [&](const World& cur) {
    if (a.trace) write_trace_rows(trace, cur);
  };

  std::vector<TransitionRecord> rows;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (i > 0) dispatch_formation(w, cfg, forms[i].plan);
    const double next =
        i + 1 < forms.size() ? sc.entries[i + 1].dispatchTime : std::numeric_limits<double>::infinity();
    TransitionRecord rec;
    rec.index = i;
    rec.formation = forms[i].spec.name;
    rec.dispatchTime = w.time;
    rec.metrics = run_until_settled(w, cfg, observer, next);
    rec.metrics.seed = cfg.seed;
    rows.push_back(rec);
    out << fmt::format("transition {} ({}): {} at t = {:.2f} s, {:.2f} s, mean distance {:.2f} m\n", i + 1,
                       rec.formation,
                       rec.metrics.success ? "converged" : (rec.metrics.gridlocked ? "gridlocked" : "not converged"),
                       w.time, rec.metrics.success ? rec.metrics.convergenceTime : rec.metrics.simTime,
                       rec.metrics.meanDistanceTraveled);
    // Hold until the next dispatch.
    while (i + 1 < forms.size() && w.time < next - 1e-9) {
      step(w, cfg);
      observer(w);
    }
  }

  write_text_file(outDir / "transitions.csv", transitions_csv(rows, fingerprint));
  if (a.trace) write_text_file(outDir / "trace.csv", trace.str());
  if (a.assignmentTrace) write_text_file(outDir / "assignments.csv", assignment_events_csv(w.assignmentEvents, fingerprint));
  out << "wrote " << (outDir / "transitions.csv").string() << "\n";
  return kOk;
}

// montecarlo

struct MonteCarloArgs {
  std::string config;
  std::string outDir;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> masterSeed;
};

int cmd_montecarlo(const MonteCarloArgs& a, std::ostream& out, std::ostream&) {
  MonteCarloConfig cfg = load_montecarlo_config(a.config);
  if (a.threads) cfg.threads = *a.threads;
  if (a.trials) cfg.trials = *a.trials;
  if (a.masterSeed) cfg.masterSeed = *a.masterSeed;
  if (cfg.trials == 0) throw ParseError("--trials must be positive");

  const std::string fingerprint = hex64(fnv1a64("montecarlo\n" + montecarlo_config_to_json(cfg)));
  const MonteCarloResult res = run_montecarlo(cfg);
  const fs::path outDir = output_dir(a.outDir);
  write_text_file(outDir / "trials.csv", trials_csv(res.records, fingerprint));
  write_text_file(outDir / "aggregate.csv", aggregate_csv(res.rows, fingerprint));

  out << fmt::format("{:<13} {:<10} {:>9} {:>15} {:>15} {:>8}\n", "graph", "mode", "success", "distance (m)",
                     "time (s)", "reassign");
  for (const auto& r : res.rows) {
    out << fmt::format("{:<13} {:<10} {:>8.1f}% {:>7.2f} ± {:<5.2f} {:>7.2f} ± {:<5.2f} {:>8.2f}\n", to_string(r.graph),
                       to_string(r.mode), 100.0 * r.successRate, r.distanceMean, r.distanceStd, r.timeMean, r.timeStd,
                       r.reassignmentMean);
  }
  out << "wrote " << (outDir / "aggregate.csv").string() << "\n";
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InfeasibleDensityError*>(&e)) return kTrialInfeasible;
  if (dynamic_cast<const NumericalFailureError*>(&e) || dynamic_cast<const GainQualityError*>(&e) ||
      dynamic_cast<const DependentConstraintsError*>(&e) || dynamic_cast<const SimulationFaultError*>(&e) ||
      dynamic_cast<const AssignmentError*>(&e))
    return kNumericalFailure;
  return kInputError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed formation control: gain design, simulation and Monte Carlo sweeps", "swarmform"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  DesignArgs da;
  auto* dg = app.add_subcommand("design-gains", "Solve for formation gains and write a gains file");
  dg->add_option("formation", da.formation, "Formation spec (JSON)")->required();
  dg->add_option("-o,--out", da.out, "Gains file (default: <output-dir>/gains/<hash>.json)");
  dg->add_option("--output-dir", da.outDir, "Output directory (env SWARMFORM_OUTPUT_DIR)");
  add_solver_flags(dg, da.solver);

  VerifyArgs va;
  auto* vg = app.add_subcommand("verify-gains", "Check a gains file against its formation");
  vg->add_option("formation", va.formation, "Formation spec (JSON)")->required();
  vg->add_option("gains", va.gains, "Gains file")->required();

  SimulateArgs sa;
  std::uint64_t seed = 0;
  auto* sm = app.add_subcommand("simulate", "Run a formation-dispatch scenario");
  sm->add_option("scenario", sa.scenario, "Scenario file (JSON)")->required();
  sm->add_option("--gains-dir", sa.gainsDir, "Gains cache directory (default: <output-dir>/gains)");
  sm->add_option("--output-dir", sa.outDir, "Output directory (env SWARMFORM_OUTPUT_DIR)");
  sm->add_option("--assignment", sa.assignment, "Override assignment mode: none, cbaa or hungarian");
  auto* seedOpt = sm->add_option("--seed", seed, "Override the scenario seed");
  sm->add_flag("--design", sa.design, "Design and cache gains that are missing");
  sm->add_flag("--trace", sa.trace, "Write the per-step trajectory trace");
  sm->add_flag("--assignment-trace", sa.assignmentTrace, "Write one record per reassignment run");
  add_solver_flags(sm, sa.solver);

  MonteCarloArgs ma;
  std::size_t threads = 0;
  std::size_t trials = 0;
  std::uint64_t masterSeed = 0;
  auto* mc = app.add_subcommand("montecarlo", "Run seeded trials and write aggregate statistics");
  mc->add_option("config", ma.config, "Monte Carlo config (JSON)")->required();
  mc->add_option("--output-dir", ma.outDir, "Output directory (env SWARMFORM_OUTPUT_DIR)");
  auto* threadsOpt = mc->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* trialsOpt = mc->add_option("--trials", trials, "Override trial count")->check(CLI::PositiveNumber);
  auto* seedMc = mc->add_option("--master-seed", masterSeed, "Override the master seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*dg) return cmd_design_gains(da, out, err);
    if (*vg) return cmd_verify_gains(va, out, err);
    if (*sm) {
      if (*seedOpt) sa.seed = seed;
      return cmd_simulate(sa, out, err);
    }
    if (*mc) {
      if (*threadsOpt) ma.threads = threads;
      if (*trialsOpt) ma.trials = trials;
      if (*seedMc) ma.masterSeed = masterSeed;
      return cmd_montecarlo(ma, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace swarmform::cli
