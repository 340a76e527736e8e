#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mapdfs/engine.hpp"
#include "mapdfs/harness.hpp"
#include "oracles.hpp"

using namespace mapdfs;
using namespace mapdfs::testhelp;

namespace {

OrientedEnvironment env1() {
  static OrientedEnvironment env =
      orient_main_area(load_environment_file(data_file("env1.json")), 1);
  return env;
}

OrientedEnvironment env4() {
  static OrientedEnvironment env =
      orient_main_area(load_environment_file(data_file("env4.json")), 1);
  return env;
}

int count_kind(const Trace& trace, EventKind k) {
  int n = 0;
  for (const TraceEvent& ev : trace) n += ev.kind == k;
  return n;
}

}  // namespace

TEST_CASE("move durations follow the delay model") {
  SimConfig cfg;
  cfg.t_mv = 3;

  Rng rng(1);
  cfg.nu = 0.0;
  for (int i = 0; i < 100; ++i) CHECK(sample_move_duration(cfg, rng) == 3);

  cfg.nu = 1.0;
  for (int i = 0; i < 100; ++i) {
    int d = sample_move_duration(cfg, rng);
    CHECK((d == 4 || d == 5));
  }

  cfg.nu = 0.2;
  int delayed = 0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) delayed += sample_move_duration(cfg, rng) > 3;
  double rate = static_cast<double>(delayed) / samples;
  CHECK(rate == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +/- 0.01
}

TEST_CASE("task generation draws endpoint pairs") {
  OrientedEnvironment env = env1();
  SimConfig cfg;
  cfg.n_tasks = 200;
  Rng rng(5);
  TaskPool pool = generate_tasks(env, cfg, rng);
  REQUIRE(pool.tasks.size() == 200);
  std::set<int> materials;
  for (const Task& t : pool.tasks) {
    CHECK(env.base.nodes[t.pickup].is_task_endpoint());
    CHECK(env.base.nodes[t.delivery].is_task_endpoint());
    CHECK(t.pickup != t.delivery);
    materials.insert(t.material);
  }
  CHECK(materials.size() == 200);  // one material per task

  // FIFO assignment
  auto first = assign_next_task(pool);
  auto second = assign_next_task(pool);
  REQUIRE(first);
  REQUIRE(second);
  CHECK(first->id == 0);
  CHECK(second->id == 1);

  pool.next = pool.tasks.size();
  CHECK_FALSE(assign_next_task(pool));
}

TEST_CASE("restricted pickup endpoints pin every task") {
  OrientedEnvironment env = env1();
  SimConfig cfg;
  cfg.n_tasks = 50;
  NodeIndex red = kNoNode;
  for (int v = 0; v < static_cast<int>(env.base.nodes.size()); ++v)
    if (env.base.nodes[v].is_task_endpoint()) {
      red = v;
      break;
    }
  cfg.pickup_endpoints = {red};
  Rng rng(5);
  TaskPool pool = generate_tasks(env, cfg, rng);
  for (const Task& t : pool.tasks) CHECK(t.pickup == red);
}

TEST_CASE("an empty task pool finishes immediately with everyone parked") {
  SimConfig cfg;
  cfg.n_agents = 4;
  cfg.n_tasks = 0;
  InstanceResult r = run_instance(env1(), cfg);
  CHECK(r.completed);
  CHECK(r.makespan == 0);
  CHECK(count_kind(r.trace, EventKind::Depart) == 0);
}

TEST_CASE("config and environment preconditions are enforced") {
  SimConfig cfg;
  cfg.t_lu = 1;  // below t_mv
  CHECK_THROWS_AS(run_instance(env1(), cfg), EnvError);

  SimConfig too_many;
  too_many.n_agents = 9;  // margin 1 on the ten-node environment
  CHECK_THROWS_AS(run_instance(env4(), too_many), EnvError);
}

TEST_CASE("two agents chain through a shared corridor without collisions") {
  // All-endpoint directed ring: agents constantly follow each other.
  std::vector<Node> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 0; i < 4; ++i) {
    nodes.push_back(node(i, 10.0 * i, i % 2 ? 8.0 : 0.0, NodeKind::TaskEndpoint));
    edges.push_back({i, (i + 1) % 4});
  }
  OrientedEnvironment env = orient_main_area(make_environment(nodes, edges), 1);

  SimConfig cfg;
  cfg.n_agents = 2;
  cfg.n_tasks = 10;
  cfg.start = SimConfig::Start::RandomMain;
  cfg.timestep_limit = 2000;
  InstanceResult r = run_instance(env, cfg);
  CHECK(r.completed);
  CHECK(validate_trace(r.trace, env).clean());

  // asynchrony witness: two distinct agents in transit at the same time
  std::vector<std::tuple<int, long long, long long>> transits;
  std::map<int, long long> depart_at;
  for (const TraceEvent& ev : r.trace) {
    if (ev.kind == EventKind::Depart) depart_at[ev.agent] = ev.t;
    if (ev.kind == EventKind::Arrive && depart_at.count(ev.agent))
      transits.push_back({ev.agent, depart_at[ev.agent], ev.t});
  }
  bool overlap = false;
  for (size_t i = 0; i < transits.size() && !overlap; ++i)
    for (size_t j = i + 1; j < transits.size() && !overlap; ++j) {
      auto [a1, d1, r1] = transits[i];
      auto [a2, d2, r2] = transits[j];
      overlap = a1 != a2 && d1 < r2 && d2 < r1;
    }
  CHECK(overlap);
}

TEST_CASE("loading occupies the node for exactly t_lu and blocks the queue") {
  OrientedEnvironment env = env4();
  SimConfig cfg;
  cfg.n_agents = 3;
  cfg.n_tasks = 12;
  cfg.t_lu = 6;
  cfg.start = SimConfig::Start::RandomMain;
  cfg.timestep_limit = 5000;
  // every pickup on one node: agents must queue behind the loader
  cfg.pickup_endpoints = {0};
  InstanceResult r = run_instance(env, cfg);
  CHECK(r.completed);
  CHECK(validate_trace(r.trace, env).clean());

  std::map<int, long long> load_started;
  int load_pairs = 0;
  for (const TraceEvent& ev : r.trace) {
    if (ev.kind == EventKind::LoadStart) load_started[ev.task] = ev.t;
    if (ev.kind == EventKind::LoadEnd) {
      REQUIRE(load_started.count(ev.task));
      CHECK(ev.t - load_started[ev.task] == cfg.t_lu);
      ++load_pairs;
    }
  }
  CHECK(load_pairs == cfg.n_tasks);
  CHECK(count_kind(r.trace, EventKind::Wait) + count_kind(r.trace, EventKind::Detour) > 0);
}

TEST_CASE("a seed fully determines the trace and message log") {
  SimConfig cfg;
  cfg.n_agents = 8;
  cfg.n_tasks = 40;
  cfg.seed = 42;
  cfg.record_messages = true;
  OrientedEnvironment env = env1();
  InstanceResult a = run_instance(env, cfg);
  InstanceResult b = run_instance(env, cfg);
  CHECK(a.completed);
  CHECK(a.makespan == b.makespan);
  CHECK(a.end_time == b.end_time);
  CHECK(trace_to_jsonl(a.trace, env.base) == trace_to_jsonl(b.trace, env.base));
  CHECK(messages_to_jsonl(a.messages, env.base) == messages_to_jsonl(b.messages, env.base));
}

TEST_CASE("tasks are conserved and the trace is chronological per agent") {
  OrientedEnvironment env = env1();
  for (uint64_t seed : {3u, 11u}) {
    SimConfig cfg;
    cfg.n_agents = 6;
    cfg.n_tasks = 30;
    cfg.seed = seed;
    InstanceResult r = run_instance(env, cfg);
    REQUIRE(r.completed);
    CHECK(count_kind(r.trace, EventKind::TaskAssigned) == cfg.n_tasks);
    CHECK(count_kind(r.trace, EventKind::TaskCompleted) == cfg.n_tasks);
    CHECK(count_kind(r.trace, EventKind::LoadStart) == cfg.n_tasks);
    CHECK(count_kind(r.trace, EventKind::UnloadEnd) == cfg.n_tasks);

    std::set<int> loaded, unloaded;
    std::map<int, long long> last_t;
    for (const TraceEvent& ev : r.trace) {
      CHECK(ev.t >= last_t[ev.agent]);
      last_t[ev.agent] = ev.t;
      if (ev.kind == EventKind::LoadEnd) CHECK(loaded.insert(ev.task).second);
      if (ev.kind == EventKind::UnloadEnd) CHECK(unloaded.insert(ev.task).second);
    }
    CHECK(loaded.size() == static_cast<size_t>(cfg.n_tasks));  // each material once
    CHECK(unloaded.size() == static_cast<size_t>(cfg.n_tasks));

    // all agents returned to their parking leaves
    CHECK(count_kind(r.trace, EventKind::Parked) == cfg.n_agents);
  }
}

TEST_CASE("makespan clears the longest-task lower bound") {
  OrientedEnvironment env = env1();
  SimConfig cfg;
  cfg.n_agents = 10;
  cfg.n_tasks = 25;
  cfg.seed = 9;
  InstanceResult r = run_instance(env, cfg);
  REQUIRE(r.completed);

  Rng task_rng = Rng(cfg.seed).fork(1);  // the engine's task stream
  TaskPool pool = generate_tasks(env, cfg, task_rng);
  long long bound = 0;
  for (const Task& t : pool.tasks)
    bound = std::max(bound, static_cast<long long>(oracle::bfs_distance(env, t.pickup, t.delivery)) *
                                cfg.t_mv);
  CHECK(r.makespan >= bound);
}

TEST_CASE("agents without tasks stay parked") {
  OrientedEnvironment env = env1();
  SimConfig cfg;
  cfg.n_agents = 5;
  cfg.n_tasks = 2;  // fewer tasks than agents
  InstanceResult r = run_instance(env, cfg);
  CHECK(r.completed);
  CHECK(count_kind(r.trace, EventKind::Parked) == 2);  // only the two workers come back
}

TEST_CASE("tight-margin environment completes with wandering idlers") {
  SimConfig cfg;
  cfg.n_agents = 8;
  cfg.n_tasks = 20;
  cfg.seed = 4;
  cfg.timestep_limit = 50000;
  cfg.start = SimConfig::Start::RandomMain;
  OrientedEnvironment env = env4();
  InstanceResult r = run_instance(env, cfg);
  CHECK(r.completed);
  CHECK(validate_trace(r.trace, env).clean());
}

TEST_CASE("message log export lists the request round trips") {
  SimConfig cfg;
  cfg.n_agents = 2;
  cfg.n_tasks = 4;
  cfg.record_messages = true;
  OrientedEnvironment env = env1();
  InstanceResult r = run_instance(env, cfg);
  REQUIRE(r.completed);
  REQUIRE_FALSE(r.messages.empty());
  std::string jsonl = messages_to_jsonl(r.messages, env.base);
  CHECK(jsonl.find("\"kind\":\"request\"") != std::string::npos);
  CHECK(jsonl.find("\"sender\":\"agent:0\"") != std::string::npos);
  CHECK(jsonl.find("\"kind\":\"accept\"") != std::string::npos);
}
