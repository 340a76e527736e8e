#include "mapdfs/engine.hpp"

#include <algorithm>
#include <chrono>

namespace mapdfs {

int sample_move_duration(const SimConfig& config, Rng& rng) {
  int d = config.t_mv;
  if (config.nu > 0.0 && !config.t_nse_choices.empty() && rng.chance(config.nu))
    d += config.t_nse_choices[rng.index(static_cast<int>(config.t_nse_choices.size()))];
  return d;
}

TaskPool generate_tasks(const OrientedEnvironment& env, const SimConfig& config, Rng& rng) {
  const EnvironmentGraph& g = env.base;
  auto endpoint_list = [&](const std::vector<NodeIndex>& override_list, const char* what) {
    std::vector<NodeIndex> out = override_list;
    if (out.empty()) {
      for (int v = 0; v < static_cast<int>(g.nodes.size()); ++v)
        if (g.nodes[v].is_task_endpoint()) out.push_back(v);
    }
    for (NodeIndex v : out) {
      if (v < 0 || v >= static_cast<int>(g.nodes.size()) || !g.nodes[v].is_task_endpoint())
        throw EnvError(std::string(what) + " list contains a non-endpoint node");
    }
    if (out.empty()) throw EnvError(std::string("environment has no ") + what + " endpoints");
    return out;
  };
  const auto pickups = endpoint_list(config.pickup_endpoints, "pickup");
  const auto deliveries = endpoint_list(config.delivery_endpoints, "delivery");
  if (pickups.size() == 1 && deliveries.size() == 1 && pickups[0] == deliveries[0])
    throw EnvError("tasks cannot avoid pickup == delivery with a single shared endpoint");

  TaskPool pool;
  pool.tasks.reserve(config.n_tasks);
  for (int k = 0; k < config.n_tasks; ++k) {
    NodeIndex p, d;
    do {
      p = pickups[rng.index(static_cast<int>(pickups.size()))];
      d = deliveries[rng.index(static_cast<int>(deliveries.size()))];
    } while (p == d);  // zero-hop tasks are degenerate; redraw
    pool.tasks.push_back({k, p, d, k});
  }
  return pool;
}

std::optional<Task> assign_next_task(TaskPool& pool) {
  if (pool.empty()) return std::nullopt;
  return pool.tasks[pool.next++];
}

namespace {

struct Engine {
  const OrientedEnvironment& env;
  const SimConfig& cfg;
  ProtocolState st;
  std::vector<CarrierState> carriers;
  TaskPool pool;
  Rng noise_rng, protocol_rng, wander_rng;
  InstanceResult result;
  long long t = 0;
  int tasks_done = 0;
  long long last_completion = 0;
  bool pool_flip_done = false;

  Engine(const OrientedEnvironment& e, const SimConfig& c)
      : env(e), cfg(c), noise_rng(0), protocol_rng(0), wander_rng(0) {
    Rng base(cfg.seed);
    Rng task_rng = base.fork(1);
    noise_rng = base.fork(2);
    protocol_rng = base.fork(3);
    Rng placement_rng = base.fork(4);
    wander_rng = base.fork(5);

    st.init(env);
    if (cfg.record_messages) st.log = &result.messages;
    pool = generate_tasks(env, cfg, task_rng);
    place_agents(placement_rng);
  }

  const EnvironmentGraph& g() const { return env.base; }

  void emit(TraceEvent ev) {
    ev.t = t;
    result.trace.push_back(ev);
  }

  Path plan(NodeIndex from, NodeIndex to) {
    auto t0 = std::chrono::steady_clock::now();
    Path p = shortest_path(env, from, to);
    result.planning_time_sec += std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    return p;
  }

  void place_agents(Rng& placement_rng) {
    carriers.resize(cfg.n_agents);
    std::vector<NodeIndex> spots;
    if (cfg.start == SimConfig::Start::Parking) {
      for (int v = 0; v < static_cast<int>(g().nodes.size()); ++v)
        if (g().nodes[v].is_parking()) spots.push_back(v);
      if (static_cast<int>(spots.size()) < cfg.n_agents)
        throw EnvError("need " + std::to_string(cfg.n_agents) + " parking nodes, have " +
                       std::to_string(spots.size()));
    } else {
      spots = g().main_nodes;
      placement_rng.shuffle(spots);
    }
    for (int i = 0; i < cfg.n_agents; ++i) {
      CarrierState& c = carriers[i];
      c.id = i;
      c.current = spots[i];
      c.path = {c.current};
      if (cfg.start == SimConfig::Start::Parking) {
        c.parking_node = spots[i];
      } else {
        st.set_reservation(c.current, i);
      }
    }
  }

  NodeIndex destination_of(const CarrierState& c) const {
    switch (c.phase) {
      case Phase::ToPickup: return c.task->pickup;
      case Phase::ToDelivery: return c.task->delivery;
      case Phase::ToParking: return c.parking_node;  // kNoNode: roam until the end
      case Phase::Parked: return kNoNode;
    }
    return kNoNode;
  }

  bool at_destination(const CarrierState& c) const {
    NodeIndex d = destination_of(c);
    return d != kNoNode && c.current == d;
  }

  bool is_wanderer(const CarrierState& c) const {
    return c.phase == Phase::ToParking && c.parking_node == kNoNode;
  }

  void flip_gates_if_pool_empty() {
    if (pool_flip_done || !pool.empty()) return;
    for (NodeIndex r : g().roots) parking_tree_phase_update(st.at(r), true);
    pool_flip_done = true;
  }

  void give_task(CarrierState& c, const Task& task) {
    c.task = task;
    c.phase = Phase::ToPickup;
    emit({.agent = c.id, .kind = EventKind::TaskAssigned, .node = c.current, .task = task.id});
    c.path = plan(c.current, task.pickup);
    c.path_pos = 0;
  }

  void retire(CarrierState& c) {
    c.phase = Phase::ToParking;
    if (c.parking_node != kNoNode) {
      c.path = plan(c.current, c.parking_node);
      c.path_pos = 0;
    } else {
      c.path = {c.current};  // no parking node in this environment: keep roaming
      c.path_pos = 0;
    }
  }

  void depart(CarrierState& c, NodeIndex to) {
    if (!env.can_traverse(c.current, to))
      throw ProtocolViolation("illegal hop " + std::to_string(g().id_of(c.current)) + " -> " +
                              std::to_string(g().id_of(to)));
    if (g().is_main(to) && st.reservation(to) != c.id)
      throw ProtocolViolation("agent departs to a node it has not reserved");
    if (g().is_main(c.current)) st.release(c.current, c.id);
    emit({.agent = c.id, .kind = EventKind::Depart, .from = c.current, .to = to});
    c.in_transit = true;
    c.transit_from = c.current;
    c.transit_to = to;
    c.reserved_next = g().is_main(to) ? to : kNoNode;
    c.busy_until = t + sample_move_duration(cfg, noise_rng);
  }

  void do_arrive(CarrierState& c) {
    const NodeIndex from = c.transit_from, to = c.transit_to;
    c.in_transit = false;
    c.current = to;
    c.reserved_next = kNoNode;
    emit({.agent = c.id, .kind = EventKind::Arrive, .node = to});
    if (g().is_main(to) && st.reservation(to) != c.id)
      throw ProtocolViolation("agent arrived at a node it does not hold");
    // Stepping out of a tree onto its root frees the subtree.
    if (!g().is_main(from) && g().is_main(to)) st.mover_left_tree(to);

    if (c.path_pos < c.path.size() && c.path[c.path_pos] == to) {
      // detour replan already rebased the path on `to`
    } else if (c.has_next() && c.next_node() == to) {
      ++c.path_pos;
    } else if (is_wanderer(c)) {
      c.path = {to};
      c.path_pos = 0;
    } else {
      throw ProtocolViolation("agent arrived off its path");
    }

    if (c.phase == Phase::ToParking && to == c.parking_node) {
      st.mover_left_tree(g().trees[g().tree_of[to]].root);
      c.phase = Phase::Parked;
      emit({.agent = c.id, .kind = EventKind::Parked, .node = to});
    }
  }

  void do_load_end(CarrierState& c) {
    c.loading = false;
    emit({.agent = c.id, .kind = EventKind::LoadEnd, .node = c.current, .task = c.task->id});
    c.phase = Phase::ToDelivery;
    c.path = plan(c.current, c.task->delivery);
    c.path_pos = 0;
  }

  void do_unload_end(CarrierState& c) {
    c.unloading = false;
    emit({.agent = c.id, .kind = EventKind::UnloadEnd, .node = c.current, .task = c.task->id});
    emit({.agent = c.id, .kind = EventKind::TaskCompleted, .node = c.current, .task = c.task->id});
    ++tasks_done;
    last_completion = t;
    c.task.reset();
    if (auto task = assign_next_task(pool)) {
      give_task(c, *task);
    } else {
      retire(c);
    }
    flip_gates_if_pool_empty();
  }

  // Accept: leave now. Wait: hold the node one timestep and re-request.
  // Detour: take the already-reserved alternative and replan from it.
  void apply_reply(CarrierState& c, NodeIndex requested, const Reply& r) {
    if (r.accepted) {
      depart(c, requested);
      return;
    }
    if (r.som.kind == SomKind::Wait) {
      emit({.agent = c.id, .kind = EventKind::Wait, .node = c.current});
      c.busy_until = t + 1;
      return;
    }
    emit({.agent = c.id, .kind = EventKind::Detour, .from = c.current, .to = r.som.alternative});
    if (is_wanderer(c)) {
      c.path = {c.current, r.som.alternative};
    } else {
      auto t0 = std::chrono::steady_clock::now();
      c.path = replan_from(env, r.som.alternative, destination_of(c));
      result.planning_time_sec += std::chrono::duration<double>(
          std::chrono::steady_clock::now() - t0).count();
    }
    c.path_pos = 0;
    depart(c, r.som.alternative);
  }

  void wander_step(CarrierState& c) {
    const auto neighbors = env.main_out_neighbors(c.current);
    if (neighbors.empty()) throw ProtocolViolation("main node without outgoing edge");
    NodeIndex pick = neighbors[wander_rng.index(static_cast<int>(neighbors.size()))];
    c.path = {c.current, pick};
    c.path_pos = 0;
    st.now = t;
    apply_reply(c, pick, handle_request(st, c, pick, protocol_rng));
  }

  void movement_step(CarrierState& c) {
    TickAction action = carrier_tick(c, env);
    if (action.kind == TickAction::Idle)
      throw ProtocolViolation("agent " + std::to_string(c.id) + " has no next hop");
    if (action.kind == TickAction::LocalMove) {
      depart(c, action.next);  // both ends marginal: no confirmation
      return;
    }
    st.now = t;
    apply_reply(c, action.next, handle_request(st, c, action.next, protocol_rng));
  }

  void continue_agent(CarrierState& c) {
    if (at_destination(c)) {
      if (c.phase == Phase::ToPickup) {
        emit({.agent = c.id, .kind = EventKind::LoadStart, .node = c.current, .task = c.task->id});
        c.loading = true;
        c.busy_until = t + cfg.t_lu;
      } else if (c.phase == Phase::ToDelivery) {
        emit({.agent = c.id, .kind = EventKind::UnloadStart, .node = c.current, .task = c.task->id});
        c.unloading = true;
        c.busy_until = t + cfg.t_lu;
      } else {
        throw ProtocolViolation("unexpected destination state");
      }
      return;
    }
    if (is_wanderer(c)) {
      wander_step(c);
      return;
    }
    movement_step(c);
  }

  void act(CarrierState& c) {
    if (c.in_transit) {
      do_arrive(c);
    } else if (c.loading) {
      do_load_end(c);
    } else if (c.unloading) {
      do_unload_end(c);
    }
    if (c.busy_until > t || c.phase == Phase::Parked) return;
    continue_agent(c);
  }

  bool done() const {
    if (tasks_done < cfg.n_tasks) return false;
    for (const CarrierState& c : carriers)
      if (c.parking_node != kNoNode && c.phase != Phase::Parked) return false;
    return true;
  }

  InstanceResult run() {
    // Spawn markers, then the simultaneous initial assignment.
    for (CarrierState& c : carriers)
      emit({.agent = c.id, .kind = EventKind::Arrive, .node = c.current});
    for (CarrierState& c : carriers) {
      if (auto task = assign_next_task(pool)) {
        give_task(c, *task);
      } else if (c.parking_node == kNoNode) {
        retire(c);
      }
    }
    flip_gates_if_pool_empty();

    for (t = 0; t <= cfg.timestep_limit; ++t) {
      if (done()) break;
      for (CarrierState& c : carriers)
        if (c.busy_until == t && !(c.phase == Phase::Parked && !c.task)) act(c);
    }

    result.completed = tasks_done == cfg.n_tasks;
    result.tasks_completed = tasks_done;
    result.makespan = last_completion;
    result.end_time = std::min(t, cfg.timestep_limit);
    if (!result.completed)
      result.failure_reason = "timestep limit exceeded (" + std::to_string(tasks_done) + " of " +
                              std::to_string(cfg.n_tasks) + " tasks completed)";
    return std::move(result);
  }
};

void check_config(const SimConfig& cfg) {
  if (cfg.t_mv < 1) throw EnvError("t_mv must be at least 1");
  if (cfg.t_lu < cfg.t_mv) throw EnvError("t_lu must be at least t_mv");
  if (cfg.nu < 0.0 || cfg.nu > 1.0) throw EnvError("nu must be in [0, 1]");
  if (cfg.n_agents < 1) throw EnvError("need at least one agent");
  if (cfg.n_tasks < 0) throw EnvError("n_tasks must be non-negative");
  if (cfg.timestep_limit < 0) throw EnvError("timestep_limit must be non-negative");
  for (int u : cfg.t_nse_choices)
    if (u < 1) throw EnvError("t_nse choices must be positive");
}

}  // namespace

InstanceResult run_instance(const OrientedEnvironment& env, const SimConfig& config) {
  check_config(config);
  ValidationReport report = validate(env.base, config.n_agents);
  if (!report.all_pass()) {
    std::string why;
    for (const ConditionResult* c : {&report.sc1, &report.sc2, &report.sc3, &report.ac1})
      if (!c->pass) why += (why.empty() ? "" : "; ") + c->detail;
    throw EnvError("environment rejected: " + why);
  }

  Engine engine(env, config);
  try {
    return engine.run();
  } catch (const ProtocolViolation& e) {
    InstanceResult r = std::move(engine.result);
    r.completed = false;
    r.tasks_completed = engine.tasks_done;
    r.makespan = 0;
    r.end_time = engine.t;
    r.protocol_violation = true;
    r.failure_reason = std::string("protocol violation: ") + e.what();
    return r;
  }
}

}  // namespace mapdfs
