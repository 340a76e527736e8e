#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mapdfs/harness.hpp"

using namespace mapdfs;

namespace {

// Exit codes: 0 ok, 1 validation failure, 2 protocol violation detected,
// 3 I/O error.
constexpr int kOk = 0, kValidationFailure = 1, kProtocolViolation = 2, kIoError = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts either a plain environment (oriented on the fly) or an oriented one.
OrientedEnvironment load_any_oriented(const std::string& path, uint64_t seed) {
  const std::string text = slurp(path);
  if (text.find("\"direction\"") != std::string::npos) return load_oriented(text);
  return orient_main_area(load_environment(text), seed);
}

void print_report(const ValidationReport& r) {
  auto line = [](const char* name, const ConditionResult& c) {
    std::cout << name << ": " << (c.pass ? "pass" : "FAIL") << " (" << c.detail << ")\n";
  };
  line("SC1", r.sc1);
  line("SC2", r.sc2);
  line("SC3", r.sc3);
  line("AC1", r.ac1);
  std::cout << "open-node margin: " << r.open_node_margin << "\n";
  if (r.efficiency_warning)
    std::cout << "warning: fewer than half of the main-area nodes stay open\n";
}

int cmd_validate(const std::string& env_path, int agents) {
  EnvironmentGraph g = load_environment_file(env_path);
  ValidationReport r = validate(g, agents);
  print_report(r);
  return r.all_pass() ? kOk : kValidationFailure;
}

int cmd_orient(const std::string& env_path, const std::string& out_path, uint64_t seed) {
  EnvironmentGraph g = load_environment_file(env_path);
  OrientedEnvironment env = orient_main_area(g, seed);
  if (!verify_strong_connectivity(env)) {
    std::cerr << "orientation is not strongly connected\n";
    return kValidationFailure;
  }
  write_file(out_path, save_oriented(env));
  std::cout << "oriented " << g.main_nodes.size() << " main nodes, wrote " << out_path << "\n";
  return kOk;
}

int cmd_plan(const std::string& env_path, NodeId from_id, NodeId to_id, uint64_t seed) {
  OrientedEnvironment env = load_any_oriented(env_path, seed);
  NodeIndex from = env.base.index_of(from_id);
  NodeIndex to = env.base.index_of(to_id);
  if (from == kNoNode || to == kNoNode) {
    std::cerr << "unknown node id\n";
    return kValidationFailure;
  }
  Path p = shortest_path(env, from, to);
  for (size_t i = 0; i < p.size(); ++i) std::cout << (i ? " -> " : "") << env.base.id_of(p[i]);
  std::cout << "\n" << (p.size() - 1) << " hop(s)\n";
  return kOk;
}

int cmd_run(const std::string& scenario_path, const RunOptions& options) {
  Scenario scenario = load_scenario_file(scenario_path);
  ScenarioResult result = run_scenario(scenario, options);

  std::cout << metrics_to_csv(aggregate(result));
  bool any_cell_ran = false;
  bool any_violation = false;
  for (const CellResult& cell : result.cells) {
    if (!cell.skipped) any_cell_ran = true;
    for (const TrialRecord& rec : cell.trials)
      any_violation |= rec.protocol_violation || rec.violations > 0;
  }
  if (any_violation) return kProtocolViolation;
  return any_cell_ran ? kOk : kValidationFailure;
}

int cmd_check_trace(const std::string& trace_path, const std::string& env_path, uint64_t seed) {
  OrientedEnvironment env = load_any_oriented(env_path, seed);
  Trace trace = trace_from_file(trace_path, env.base);
  CollisionReport report = validate_trace(trace, env);
  if (report.clean()) {
    std::cout << "trace clean (" << trace.size() << " events)\n";
    return kOk;
  }
  for (const Violation& v : report.violations)
    std::cout << "t=" << v.t << " " << v.kind << ": " << v.detail << "\n";
  std::cout << report.violations.size() << " violation(s)\n";
  return kProtocolViolation;
}

int cmd_export(const std::string& results_path, const std::string& format,
               const std::string& out_path) {
  ScenarioResult result = result_from_json(slurp(results_path));
  auto metrics = aggregate(result);
  std::string text = format == "json" ? metrics_to_json(metrics) : metrics_to_csv(metrics);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pickup-and-delivery simulator on oriented environments"};
  app.require_subcommand(1);

  std::string env_path, out_path, scenario_path, trace_path, results_path;
  std::string format = "csv";
  int agents = 1;
  NodeId from_id = 0, to_id = 0;
  uint64_t seed = 1;
  RunOptions options;
  options.progress = &std::cerr;
  uint64_t run_seed = 0;
  bool run_seed_set = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check SC1-SC3 and AC1 for an environment");
  validate_cmd->add_option("env", env_path, "environment file")->required();
  validate_cmd->add_option("-n,--agents", agents, "agent count for AC1");

  auto* orient_cmd = app.add_subcommand("orient", "Strongly orient the main area");
  orient_cmd->add_option("env", env_path, "environment file")->required();
  orient_cmd->add_option("-o,--out", out_path, "oriented environment output")->required();
  orient_cmd->add_option("--seed", seed, "orientation seed");

  auto* plan_cmd = app.add_subcommand("plan", "Print a shortest direction-respecting path");
  plan_cmd->add_option("env", env_path, "environment file (plain or oriented)")->required();
  plan_cmd->add_option("from", from_id, "start node id")->required();
  plan_cmd->add_option("to", to_id, "goal node id")->required();
  plan_cmd->add_option("--seed", seed, "orientation seed for plain environments");

  auto* run_cmd = app.add_subcommand("run", "Run a scenario grid");
  run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  run_cmd->add_option("--trials", options.trials_override, "override trials per cell");
  run_cmd->add_option("--seed", run_seed, "override the seed base")
      ->each([&](const std::string&) { run_seed_set = true; });
  run_cmd->add_option("--out", options.out_dir, "directory for metrics/results files");
  run_cmd->add_flag("--full", options.full, "run the full-scale sweep");
  run_cmd->add_flag("--save-traces", options.save_traces, "write per-trial trace files");
  run_cmd->add_flag("--save-messages", options.save_messages, "write per-trial message logs");

  auto* check_cmd = app.add_subcommand("check-trace", "Replay a trace through the collision oracle");
  check_cmd->add_option("trace", trace_path, "trace file (jsonl)")->required();
  check_cmd->add_option("env", env_path, "oriented environment the trace ran on")->required();
  check_cmd->add_option("--seed", seed, "orientation seed for plain environments");

  auto* export_cmd = app.add_subcommand("export", "Re-aggregate stored results");
  export_cmd->add_option("results", results_path, "results.json from a run")->required();
  export_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  export_cmd->add_option("-o,--out", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(env_path, agents);
    if (orient_cmd->parsed()) return cmd_orient(env_path, out_path, seed);
    if (plan_cmd->parsed()) return cmd_plan(env_path, from_id, to_id, seed);
    if (run_cmd->parsed()) {
      if (run_seed_set) options.seed_override = run_seed;
      return cmd_run(scenario_path, options);
    }
    if (check_cmd->parsed()) return cmd_check_trace(trace_path, env_path, seed);
    if (export_cmd->parsed()) return cmd_export(results_path, format, out_path);
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const ProtocolViolation& e) {
    std::cerr << "protocol violation: " << e.what() << "\n";
    return kProtocolViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kOk;
}
