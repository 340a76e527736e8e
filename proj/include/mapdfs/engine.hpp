#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mapdfs/protocol.hpp"
#include "mapdfs/trace.hpp"

namespace mapdfs {

struct SimConfig {
  int t_mv = 3;  // timesteps per hop
  int t_lu = 3;  // timesteps per load/unload (>= t_mv)
  double nu = 0.0;                     // per-hop delay probability
  std::vector<int> t_nse_choices{1, 2};  // delay magnitudes
  int n_agents = 1;
  int n_tasks = 100;
  long long timestep_limit = 10000;
  uint64_t seed = 1;

  enum class Start : uint8_t { Parking, RandomMain };
  Start start = Start::Parking;

  // Restrict where tasks pick up / deliver; empty means every task endpoint.
  std::vector<NodeIndex> pickup_endpoints;
  std::vector<NodeIndex> delivery_endpoints;

  bool record_messages = false;
};

struct InstanceResult {
  bool completed = false;
  long long makespan = 0;  // last task-completion timestep; 0 when none completed
  double planning_time_sec = 0.0;  // wall clock summed over every planner call
  int tasks_completed = 0;
  long long end_time = 0;
  bool protocol_violation = false;
  std::string failure_reason;  // set when not completed
  Trace trace;
  MessageLog messages;  // only when SimConfig::record_messages
};

// T_mv, or T_mv plus a uniformly chosen extra with probability nu.
int sample_move_duration(const SimConfig& config, Rng& rng);

// Pre-generated task sequence; every config sharing a seed sees the same one.
struct TaskPool {
  std::vector<Task> tasks;
  size_t next = 0;

  bool empty() const { return next >= tasks.size(); }
  size_t remaining() const { return tasks.size() - next; }
};

TaskPool generate_tasks(const OrientedEnvironment& env, const SimConfig& config, Rng& rng);

// FIFO pop; nullopt once the pool is exhausted.
std::optional<Task> assign_next_task(TaskPool& pool);

// Runs one seeded instance to completion, the timestep limit, or a protocol
// violation. Agents start parked (or on seeded random main-area nodes), get
// the initial tasks simultaneously, are reassigned on completion, and head
// back to their parking nodes once the pool is empty.
InstanceResult run_instance(const OrientedEnvironment& env, const SimConfig& config);

}  // namespace mapdfs
