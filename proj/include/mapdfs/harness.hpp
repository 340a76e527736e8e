#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mapdfs/engine.hpp"

namespace mapdfs {

struct Violation {
  std::string kind;  // node_collision | opposite_traversal | backward_traversal |
                     // illegal_edge | tree_exclusivity
  long long t = 0;
  int agent_a = -1;
  int agent_b = -1;
  NodeIndex node = kNoNode;
  std::string detail;
};

struct CollisionReport {
  std::vector<Violation> violations;
  bool clean() const { return violations.empty(); }
};

// Post-hoc trace oracle: replays the event log against nothing but the
// oriented graph (no protocol state) and reports node-occupancy overlaps,
// opposite traversals of undirected edges, backward traversals of directed
// edges, hops between non-adjacent nodes, and two non-parked agents moving
// inside one tree at once. Throws TraceError on malformed traces.
CollisionReport validate_trace(const Trace& trace, const OrientedEnvironment& env);

// A declarative experiment: one environment, a grid of (agents, nu, t_lu)
// cells, a number of seeded trials per cell.
struct Scenario {
  std::string name;
  std::string environment;  // resolved path to the environment file
  std::vector<int> agents{1};
  std::vector<double> nu{0.0};
  std::vector<int> t_lu{3};
  int t_mv = 3;
  std::vector<int> t_nse{1, 2};
  int trials = 10;
  int n_tasks = 100;
  long long timestep_limit = 10000;
  uint64_t seed_base = 1;
  uint64_t orientation_seed = 1;
  SimConfig::Start start = SimConfig::Start::Parking;
  std::vector<NodeId> pickup_endpoints;
  std::vector<NodeId> delivery_endpoints;
  // The full-scale sweep, selected with --full.
  std::vector<int> agents_full;
  int trials_full = 50;
};

Scenario load_scenario(const std::string& json_text, const std::string& base_dir);
Scenario load_scenario_file(const std::string& path);

struct TrialRecord {
  uint64_t seed = 0;
  bool completed = false;  // all tasks done in time and the trace is clean
  long long makespan = 0;
  double planning_time_sec = 0.0;
  int violations = 0;
  bool protocol_violation = false;
  std::string failure_reason;
};

struct CellResult {
  int n_agents = 0;
  double nu = 0.0;
  int t_lu = 0;
  bool skipped = false;
  std::string skip_reason;
  std::vector<TrialRecord> trials;
};

struct ScenarioResult {
  std::string name;
  std::string environment;
  Scenario scenario;  // config echo for the result file
  std::vector<CellResult> cells;
};

struct CellMetrics {
  int n_agents = 0;
  double nu = 0.0;
  int t_lu = 0;
  bool skipped = false;
  std::string skip_reason;
  int trials = 0;
  int completed = 0;
  double completion_rate = 0.0;
  std::optional<double> makespan_mean;  // absent when nothing completed
  double planning_time_mean = 0.0;
};

struct RunOptions {
  bool full = false;
  int trials_override = 0;  // 0: use the scenario's value
  std::optional<uint64_t> seed_override;
  std::string out_dir;  // when set: metrics.csv/.json, results.json, oriented env
  bool save_traces = false;
  bool save_messages = false;
  std::ostream* progress = nullptr;
};

// Runs every cell of the grid (validation-failing cells are skipped with a
// diagnostic), oracle-checks every trace, and optionally writes result files.
ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options);

// Pure fold over trial records; rerunning it on stored results is idempotent.
CellMetrics aggregate_cell(const CellResult& cell);
std::vector<CellMetrics> aggregate(const ScenarioResult& result);

std::string metrics_to_csv(const std::vector<CellMetrics>& metrics);
std::string metrics_to_json(const std::vector<CellMetrics>& metrics);

// Per-trial dump, re-loadable for offline re-aggregation and export.
std::string result_to_json(const ScenarioResult& result);
ScenarioResult result_from_json(const std::string& json_text);

void write_file(const std::string& path, const std::string& content);

}  // namespace mapdfs
