#include "mapdfs/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mapdfs {

using nlohmann::json;

namespace {

constexpr long long kHorizon = 1LL << 60;  // open-ended stay sentinel

struct Stay {
  int agent;
  NodeIndex node;
  long long from, to;  // closed interval
};

struct Move {
  int agent;
  NodeIndex from_node, to_node;
  long long dep, arr;  // transit fills the open interval (dep, arr)
};

struct Replay {
  std::vector<Stay> stays;
  std::vector<Move> moves;
};

Replay replay_agents(const Trace& trace, const EnvironmentGraph& g) {
  struct AgentCursor {
    NodeIndex current = kNoNode;
    long long stay_start = 0;
    bool moving = false;
    NodeIndex move_to = kNoNode;
    long long move_dep = 0;
    long long last_t = -1;
  };
  std::map<int, AgentCursor> cursors;
  Replay out;

  for (const TraceEvent& ev : trace) {
    AgentCursor& cur = cursors[ev.agent];
    if (ev.t < cur.last_t)
      throw TraceError("agent " + std::to_string(ev.agent) + ": time goes backward at t=" +
                       std::to_string(ev.t));
    cur.last_t = ev.t;

    switch (ev.kind) {
      case EventKind::Arrive:
        if (cur.moving) {
          if (ev.node != cur.move_to)
            throw TraceError("agent " + std::to_string(ev.agent) + ": arrival at node " +
                             std::to_string(g.id_of(ev.node)) + " does not match its departure");
          if (ev.t <= cur.move_dep)
            throw TraceError("agent " + std::to_string(ev.agent) + ": zero-length transit");
          out.moves.push_back({ev.agent, cur.current, cur.move_to, cur.move_dep, ev.t});
          cur.moving = false;
        } else if (cur.current != kNoNode) {
          throw TraceError("agent " + std::to_string(ev.agent) + ": arrive without depart");
        }
        cur.current = ev.node;
        cur.stay_start = ev.t;
        break;
      case EventKind::Depart:
        if (cur.moving || cur.current == kNoNode || ev.from != cur.current)
          throw TraceError("agent " + std::to_string(ev.agent) + ": depart from node " +
                           (ev.from == kNoNode ? std::string("?") : std::to_string(g.id_of(ev.from))) +
                           " while not standing there");
        out.stays.push_back({ev.agent, cur.current, cur.stay_start, ev.t});
        cur.moving = true;
        cur.move_to = ev.to;
        cur.move_dep = ev.t;
        break;
      default:
        if (cur.moving)
          throw TraceError("agent " + std::to_string(ev.agent) + ": " +
                           event_kind_name(ev.kind) + " while on an edge");
        if (ev.node != kNoNode && cur.current != kNoNode && ev.node != cur.current &&
            ev.from == kNoNode)
          throw TraceError("agent " + std::to_string(ev.agent) + ": " +
                           event_kind_name(ev.kind) + " away from its node");
        break;
    }
  }
  for (auto& [agent, cur] : cursors) {
    if (cur.moving)
      out.moves.push_back({agent, cur.current, cur.move_to, cur.move_dep, kHorizon});
    else if (cur.current != kNoNode)
      out.stays.push_back({agent, cur.current, cur.stay_start, kHorizon});
  }
  return out;
}

}  // namespace

CollisionReport validate_trace(const Trace& trace, const OrientedEnvironment& env) {
  const EnvironmentGraph& g = env.base;
  CollisionReport report;
  Replay rp = replay_agents(trace, g);

  // Node occupancy: closed stay intervals must not overlap across agents.
  {
    auto stays = rp.stays;
    std::sort(stays.begin(), stays.end(), [](const Stay& a, const Stay& b) {
      return std::tie(a.node, a.from) < std::tie(b.node, b.from);
    });
    for (size_t i = 0; i < stays.size(); ++i) {
      long long latest_to = stays[i].to;
      size_t latest = i;
      for (size_t k = i + 1; k < stays.size() && stays[k].node == stays[i].node; ++k) {
        const Stay& b = stays[k];
        if (b.from <= latest_to && b.agent != stays[latest].agent) {
          report.violations.push_back({"node_collision", b.from, stays[latest].agent, b.agent,
                                       b.node,
                                       "agents " + std::to_string(stays[latest].agent) + " and " +
                                           std::to_string(b.agent) + " share node " +
                                           std::to_string(g.id_of(b.node))});
        }
        if (b.to > latest_to) {
          latest_to = b.to;
          latest = k;
        }
      }
      // skip the rest of this node group
      while (i + 1 < stays.size() && stays[i + 1].node == stays[i].node) ++i;
    }
  }

  // Edge use: adjacency, direction, and opposite traversal.
  std::map<std::pair<NodeIndex, NodeIndex>, int> edge_index;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    auto key = std::minmax(g.edges[e].a, g.edges[e].b);
    edge_index[{key.first, key.second}] = e;
  }
  std::map<int, std::vector<const Move*>> by_edge;
  for (const Move& m : rp.moves) {
    auto key = std::minmax(m.from_node, m.to_node);
    auto it = edge_index.find({key.first, key.second});
    if (it == edge_index.end()) {
      report.violations.push_back({"illegal_edge", m.dep, m.agent, -1, m.from_node,
                                   "no edge " + std::to_string(g.id_of(m.from_node)) + "-" +
                                       std::to_string(g.id_of(m.to_node))});
      continue;
    }
    const int e = it->second;
    if (env.direction[e] != EdgeDir::Undirected) {
      NodeIndex tail = env.direction[e] == EdgeDir::AToB ? g.edges[e].a : g.edges[e].b;
      if (m.from_node != tail) {
        report.violations.push_back({"backward_traversal", m.dep, m.agent, -1, m.from_node,
                                     "directed edge " + std::to_string(g.id_of(tail)) + "->" +
                                         std::to_string(g.id_of(g.edges[e].other(tail))) +
                                         " traversed backward"});
      }
    } else {
      by_edge[e].push_back(&m);
    }
  }
  for (const auto& [e, moves] : by_edge) {
    for (size_t i = 0; i < moves.size(); ++i) {
      for (size_t j = i + 1; j < moves.size(); ++j) {
        const Move& a = *moves[i];
        const Move& b = *moves[j];
        if (a.from_node == b.from_node) continue;  // same direction
        if (a.dep < b.arr && b.dep < a.arr) {
          report.violations.push_back(
              {"opposite_traversal", std::max(a.dep, b.dep), a.agent, b.agent, a.from_node,
               "edge " + std::to_string(g.id_of(g.edges[e].a)) + "-" +
                   std::to_string(g.id_of(g.edges[e].b)) + " crossed in opposite directions"});
        }
      }
    }
  }

  // Tree exclusivity: at most one non-parked agent inside a tree at a time.
  // Half-open intervals on doubled time so stays (closed) and transits (open)
  // merge exactly.
  for (const TreeArea& tree : g.trees) {
    std::vector<char> in_tree(g.nodes.size(), 0);
    for (NodeIndex v : tree.nodes) in_tree[v] = 1;
    std::map<int, std::vector<std::pair<long long, long long>>> spans;
    for (const Stay& s : rp.stays) {
      if (!in_tree[s.node] || g.nodes[s.node].is_parking()) continue;
      spans[s.agent].push_back({2 * s.from, 2 * s.to + 1});
    }
    for (const Move& m : rp.moves) {
      if (!in_tree[m.from_node] && !in_tree[m.to_node]) continue;
      long long hi = m.arr >= kHorizon ? 2 * kHorizon : 2 * m.arr;
      spans[m.agent].push_back({2 * m.dep + 1, hi});
    }
    std::vector<std::tuple<long long, long long, int>> all;
    for (auto& [agent, list] : spans) {
      std::sort(list.begin(), list.end());
      long long lo = 0, hi = -1;
      for (auto [s, e] : list) {  // merge touching spans of one agent
        if (hi >= 0 && s <= hi) {
          hi = std::max(hi, e);
        } else {
          if (hi >= 0) all.push_back({lo, hi, agent});
          lo = s;
          hi = e;
        }
      }
      if (hi >= 0) all.push_back({lo, hi, agent});
    }
    for (size_t i = 0; i < all.size(); ++i) {
      for (size_t j = i + 1; j < all.size(); ++j) {
        auto [s1, e1, a1] = all[i];
        auto [s2, e2, a2] = all[j];
        if (a1 == a2) continue;
        if (s1 < e2 && s2 < e1) {
          report.violations.push_back({"tree_exclusivity", std::max(s1, s2) / 2, a1, a2,
                                       tree.root,
                                       "two agents moving inside the tree rooted at " +
                                           std::to_string(g.id_of(tree.root))});
        }
      }
    }
  }

  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) { return a.t < b.t; });
  return report;
}

// ---------------------------------------------------------------------------
// Scenario loading and execution
// ---------------------------------------------------------------------------

namespace {

std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  if (pos == std::string::npos) return "";
  return path.substr(0, pos + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

Scenario load_scenario(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid scenario JSON: ") + e.what());
  }
  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    s.environment = j.at("environment").get<std::string>();
    if (!s.environment.empty() && s.environment.front() != '/')
      s.environment = base_dir + s.environment;
    s.agents = j.at("agents").get<std::vector<int>>();
    if (j.contains("nu")) s.nu = j.at("nu").get<std::vector<double>>();
    if (j.contains("t_lu")) s.t_lu = j.at("t_lu").get<std::vector<int>>();
    if (j.contains("t_mv")) s.t_mv = j.at("t_mv").get<int>();
    if (j.contains("t_nse")) s.t_nse = j.at("t_nse").get<std::vector<int>>();
    if (j.contains("trials")) s.trials = j.at("trials").get<int>();
    if (j.contains("tasks")) s.n_tasks = j.at("tasks").get<int>();
    if (j.contains("limit")) s.timestep_limit = j.at("limit").get<long long>();
    if (j.contains("seed")) s.seed_base = j.at("seed").get<uint64_t>();
    if (j.contains("orientation_seed")) s.orientation_seed = j.at("orientation_seed").get<uint64_t>();
    if (j.contains("start")) {
      std::string st = j.at("start").get<std::string>();
      if (st == "parking") s.start = SimConfig::Start::Parking;
      else if (st == "random_main") s.start = SimConfig::Start::RandomMain;
      else throw ParseError("unknown start mode \"" + st + "\"");
    }
    if (j.contains("pickup_endpoints"))
      s.pickup_endpoints = j.at("pickup_endpoints").get<std::vector<NodeId>>();
    if (j.contains("delivery_endpoints"))
      s.delivery_endpoints = j.at("delivery_endpoints").get<std::vector<NodeId>>();
    if (j.contains("agents_full")) s.agents_full = j.at("agents_full").get<std::vector<int>>();
    if (j.contains("trials_full")) s.trials_full = j.at("trials_full").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario field: ") + e.what());
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), dirname_of(path));
}

namespace {

std::vector<NodeIndex> ids_to_indices(const EnvironmentGraph& g, const std::vector<NodeId>& ids) {
  std::vector<NodeIndex> out;
  for (NodeId id : ids) {
    NodeIndex v = g.index_of(id);
    if (v == kNoNode) throw EnvError("scenario references unknown node id " + std::to_string(id));
    out.push_back(v);
  }
  return out;
}

std::string cell_tag(const CellResult& cell) {
  std::ostringstream os;
  os << "n" << cell.n_agents << "_nu" << format_double(cell.nu) << "_tlu" << cell.t_lu;
  return os.str();
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  EnvironmentGraph base = load_environment_file(scenario.environment);
  OrientedEnvironment env = orient_main_area(base, scenario.orientation_seed);

  ScenarioResult result;
  result.name = scenario.name;
  result.environment = scenario.environment;
  result.scenario = scenario;

  const auto& agent_grid = (options.full && !scenario.agents_full.empty()) ? scenario.agents_full
                                                                           : scenario.agents;
  int trials = options.full ? scenario.trials_full : scenario.trials;
  if (options.trials_override > 0) trials = options.trials_override;
  const uint64_t seed_base = options.seed_override.value_or(scenario.seed_base);
  result.scenario.trials = trials;
  result.scenario.seed_base = seed_base;

  if (!options.out_dir.empty())
    write_file(options.out_dir + "/" + scenario.name + "_oriented_env.json", save_oriented(env));

  for (int n_agents : agent_grid) {
    for (double nu : scenario.nu) {
      for (int t_lu : scenario.t_lu) {
        CellResult cell;
        cell.n_agents = n_agents;
        cell.nu = nu;
        cell.t_lu = t_lu;

        ValidationReport report = validate(env.base, n_agents);
        if (!report.all_pass()) {
          cell.skipped = true;
          for (const ConditionResult* c : {&report.sc1, &report.sc2, &report.sc3, &report.ac1})
            if (!c->pass) cell.skip_reason += (cell.skip_reason.empty() ? "" : "; ") + c->detail;
          if (options.progress)
            *options.progress << scenario.name << " " << cell_tag(cell)
                              << ": skipped (" << cell.skip_reason << ")\n";
          result.cells.push_back(std::move(cell));
          continue;
        }

        SimConfig cfg;
        cfg.t_mv = scenario.t_mv;
        cfg.t_lu = t_lu;
        cfg.nu = nu;
        cfg.t_nse_choices = scenario.t_nse;
        cfg.n_agents = n_agents;
        cfg.n_tasks = scenario.n_tasks;
        cfg.timestep_limit = scenario.timestep_limit;
        cfg.start = scenario.start;
        cfg.pickup_endpoints = ids_to_indices(env.base, scenario.pickup_endpoints);
        cfg.delivery_endpoints = ids_to_indices(env.base, scenario.delivery_endpoints);
        cfg.record_messages = options.save_messages;

        for (int k = 0; k < trials; ++k) {
          cfg.seed = seed_base + static_cast<uint64_t>(k);
          InstanceResult ir = run_instance(env, cfg);
          CollisionReport oracle = validate_trace(ir.trace, env);

          TrialRecord rec;
          rec.seed = cfg.seed;
          rec.makespan = ir.makespan;
          rec.planning_time_sec = ir.planning_time_sec;
          rec.violations = static_cast<int>(oracle.violations.size());
          rec.protocol_violation = ir.protocol_violation;
          rec.completed = ir.completed && oracle.clean() && !ir.protocol_violation;
          rec.failure_reason = ir.failure_reason;
          if (!oracle.clean() && rec.failure_reason.empty())
            rec.failure_reason = "trace oracle: " + oracle.violations.front().kind;

          if (!options.out_dir.empty() && options.save_traces)
            write_file(options.out_dir + "/" + scenario.name + "_" + cell_tag(cell) + "_trial" +
                           std::to_string(k) + ".trace.jsonl",
                       trace_to_jsonl(ir.trace, env.base));
          if (!options.out_dir.empty() && options.save_messages)
            write_file(options.out_dir + "/" + scenario.name + "_" + cell_tag(cell) + "_trial" +
                           std::to_string(k) + ".messages.jsonl",
                       messages_to_jsonl(ir.messages, env.base));
          cell.trials.push_back(std::move(rec));
        }
        if (options.progress) {
          CellMetrics m = aggregate_cell(cell);
          *options.progress << scenario.name << " " << cell_tag(cell) << ": completion "
                            << format_double(m.completion_rate);
          if (m.makespan_mean) *options.progress << ", makespan " << format_double(*m.makespan_mean);
          *options.progress << ", planning " << format_double(m.planning_time_mean) << "s\n";
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }

  if (!options.out_dir.empty()) {
    auto metrics = aggregate(result);
    write_file(options.out_dir + "/" + scenario.name + "_metrics.csv", metrics_to_csv(metrics));
    write_file(options.out_dir + "/" + scenario.name + "_metrics.json", metrics_to_json(metrics));
    write_file(options.out_dir + "/" + scenario.name + "_results.json", result_to_json(result));
  }
  return result;
}

CellMetrics aggregate_cell(const CellResult& cell) {
  CellMetrics m;
  m.n_agents = cell.n_agents;
  m.nu = cell.nu;
  m.t_lu = cell.t_lu;
  m.skipped = cell.skipped;
  m.skip_reason = cell.skip_reason;
  m.trials = static_cast<int>(cell.trials.size());
  double makespan_sum = 0.0, planning_sum = 0.0;
  for (const TrialRecord& rec : cell.trials) {
    planning_sum += rec.planning_time_sec;
    if (rec.completed) {
      ++m.completed;
      makespan_sum += static_cast<double>(rec.makespan);
    }
  }
  if (m.trials > 0) {
    m.completion_rate = static_cast<double>(m.completed) / m.trials;
    m.planning_time_mean = planning_sum / m.trials;
  }
  if (m.completed > 0) m.makespan_mean = makespan_sum / m.completed;
  return m;
}

std::vector<CellMetrics> aggregate(const ScenarioResult& result) {
  std::vector<CellMetrics> out;
  for (const CellResult& cell : result.cells) out.push_back(aggregate_cell(cell));
  return out;
}

std::string metrics_to_csv(const std::vector<CellMetrics>& metrics) {
  std::ostringstream os;
  os << "n_agents,nu,t_lu,completion_rate,makespan_mean,planning_time_mean\n";
  for (const CellMetrics& m : metrics) {
    if (m.skipped) continue;
    os << m.n_agents << "," << format_double(m.nu) << "," << m.t_lu << ","
       << format_double(m.completion_rate) << ","
       << (m.makespan_mean ? format_double(*m.makespan_mean) : "") << ","
       << format_double(m.planning_time_mean) << "\n";
  }
  return os.str();
}

std::string metrics_to_json(const std::vector<CellMetrics>& metrics) {
  json j = json::array();
  for (const CellMetrics& m : metrics) {
    json cell{{"n_agents", m.n_agents}, {"nu", m.nu},       {"t_lu", m.t_lu},
              {"trials", m.trials},     {"completed", m.completed},
              {"completion_rate", m.completion_rate},
              {"planning_time_mean", m.planning_time_mean}};
    cell["makespan_mean"] = m.makespan_mean ? json(*m.makespan_mean) : json(nullptr);
    if (m.skipped) cell["skipped"] = m.skip_reason;
    j.push_back(cell);
  }
  return j.dump(2) + "\n";
}

std::string result_to_json(const ScenarioResult& result) {
  json j;
  j["name"] = result.name;
  j["environment"] = result.environment;
  const Scenario& s = result.scenario;
  j["config"] = {{"t_mv", s.t_mv},
                 {"t_nse", s.t_nse},
                 {"trials", s.trials},
                 {"tasks", s.n_tasks},
                 {"limit", s.timestep_limit},
                 {"seed", s.seed_base},
                 {"orientation_seed", s.orientation_seed},
                 {"start", s.start == SimConfig::Start::Parking ? "parking" : "random_main"}};
  j["cells"] = json::array();
  for (const CellResult& cell : result.cells) {
    json jc{{"n_agents", cell.n_agents}, {"nu", cell.nu}, {"t_lu", cell.t_lu}};
    if (cell.skipped) jc["skipped"] = cell.skip_reason;
    jc["trials"] = json::array();
    for (const TrialRecord& rec : cell.trials) {
      json jr{{"seed", rec.seed},
              {"completed", rec.completed},
              {"makespan", rec.makespan},
              {"planning_time_sec", rec.planning_time_sec},
              {"violations", rec.violations}};
      if (rec.protocol_violation) jr["protocol_violation"] = true;
      if (!rec.failure_reason.empty()) jr["failure_reason"] = rec.failure_reason;
      jc["trials"].push_back(jr);
    }
    j["cells"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

ScenarioResult result_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid results JSON: ") + e.what());
  }
  ScenarioResult result;
  try {
    result.name = j.at("name").get<std::string>();
    result.environment = j.at("environment").get<std::string>();
    for (const auto& jc : j.at("cells")) {
      CellResult cell;
      cell.n_agents = jc.at("n_agents").get<int>();
      cell.nu = jc.at("nu").get<double>();
      cell.t_lu = jc.at("t_lu").get<int>();
      if (jc.contains("skipped")) {
        cell.skipped = true;
        cell.skip_reason = jc.at("skipped").get<std::string>();
      }
      for (const auto& jr : jc.at("trials")) {
        TrialRecord rec;
        rec.seed = jr.at("seed").get<uint64_t>();
        rec.completed = jr.at("completed").get<bool>();
        rec.makespan = jr.at("makespan").get<long long>();
        rec.planning_time_sec = jr.at("planning_time_sec").get<double>();
        rec.violations = jr.at("violations").get<int>();
        if (jr.contains("protocol_violation")) rec.protocol_violation = true;
        if (jr.contains("failure_reason"))
          rec.failure_reason = jr.at("failure_reason").get<std::string>();
        cell.trials.push_back(std::move(rec));
      }
      result.cells.push_back(std::move(cell));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad results field: ") + e.what());
  }
  return result;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace mapdfs
