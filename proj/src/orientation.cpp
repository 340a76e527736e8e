#include "mapdfs/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mapdfs/rng.hpp"

namespace mapdfs {

using nlohmann::json;

void OrientedEnvironment::rebuild_adjacency() {
  out_adjacency.assign(base.nodes.size(), {});
  max_edge_len = 0.0;
  for (int e = 0; e < static_cast<int>(base.edges.size()); ++e) {
    const Edge& ed = base.edges[e];
    if (direction[e] != EdgeDir::BToA) out_adjacency[ed.a].push_back({ed.b, e});
    if (direction[e] != EdgeDir::AToB) out_adjacency[ed.b].push_back({ed.a, e});
    const Node& na = base.nodes[ed.a];
    const Node& nb = base.nodes[ed.b];
    max_edge_len = std::max(max_edge_len, std::hypot(na.x - nb.x, na.y - nb.y));
  }
  for (auto& adj : out_adjacency) std::sort(adj.begin(), adj.end());
}

bool OrientedEnvironment::can_traverse(NodeIndex from, NodeIndex to) const {
  for (const auto& [w, e] : out_adjacency[from])
    if (w == to) return true;
  return false;
}

std::vector<NodeIndex> OrientedEnvironment::main_out_neighbors(NodeIndex v) const {
  std::vector<NodeIndex> out;
  for (const auto& [w, e] : out_adjacency[v])
    if (base.edge_in_main[e]) out.push_back(w);
  return out;
}

OrientedEnvironment orient_main_area(const EnvironmentGraph& g, uint64_t seed) {
  if (g.main_nodes.empty()) throw EnvError("cannot orient: main area is empty");
  {
    ValidationReport r = validate(g, 0);
    if (!r.sc1.pass) throw EnvError("cannot orient: " + r.sc1.detail);
  }

  OrientedEnvironment env;
  env.base = g;
  env.direction.assign(g.edges.size(), EdgeDir::Undirected);

  Rng rng(seed);
  // Randomized neighbor order, main-area edges only.
  std::vector<std::vector<std::pair<NodeIndex, int>>> order(g.nodes.size());
  for (NodeIndex v : g.main_nodes) {
    for (const auto& [w, e] : g.adjacency[v])
      if (g.edge_in_main[e]) order[v].push_back({w, e});
    rng.shuffle(order[v]);
  }

  const NodeIndex start = g.main_nodes[rng.index(static_cast<int>(g.main_nodes.size()))];
  std::vector<int> disc(g.nodes.size(), -1), low(g.nodes.size(), -1);
  int timer = 0;

  auto orient = [&](int e, NodeIndex from) {
    env.direction[e] = (g.edges[e].a == from) ? EdgeDir::AToB : EdgeDir::BToA;
  };

  // Iterative DFS so deep main areas cannot overflow the stack.
  struct Frame {
    NodeIndex v;
    int parent_edge;
    size_t next = 0;
  };
  std::vector<Frame> stack{{start, -1}};
  disc[start] = low[start] = timer++;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < order[f.v].size()) {
      auto [w, e] = order[f.v][f.next++];
      if (e == f.parent_edge || env.direction[e] != EdgeDir::Undirected) continue;
      if (disc[w] < 0) {
        orient(e, f.v);  // tree edge: away from the root
        disc[w] = low[w] = timer++;
        stack.push_back({w, e});
      } else if (disc[w] < disc[f.v]) {
        orient(e, f.v);  // back edge: toward the ancestor
        low[f.v] = std::min(low[f.v], disc[w]);
      }
    } else {
      NodeIndex v = f.v;
      int pe = f.parent_edge;
      stack.pop_back();
      if (!stack.empty()) {
        NodeIndex parent = stack.back().v;
        if (low[v] > disc[parent])
          throw EnvError("bridge inside the main area at edge " +
                         std::to_string(g.id_of(g.edges[pe].a)) + "-" +
                         std::to_string(g.id_of(g.edges[pe].b)));
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  env.rebuild_adjacency();
  return env;
}

bool verify_strong_connectivity(const OrientedEnvironment& env) {
  const EnvironmentGraph& g = env.base;
  if (g.main_nodes.empty()) return false;

  auto reach = [&](bool forward) {
    std::vector<char> seen(g.nodes.size(), 0);
    std::vector<NodeIndex> stack{g.main_nodes.front()};
    seen[stack.front()] = 1;
    size_t count = 0;
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      ++count;
      for (const auto& [w, e] : g.adjacency[v]) {
        if (!g.edge_in_main[e] || seen[w]) continue;
        bool traversable;
        const Edge& ed = g.edges[e];
        if (env.direction[e] == EdgeDir::Undirected) {
          traversable = true;
        } else {
          NodeIndex tail = (env.direction[e] == EdgeDir::AToB) ? ed.a : ed.b;
          traversable = forward ? (tail == v) : (tail == w);
        }
        if (traversable) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return count;
  };

  return reach(true) == g.main_nodes.size() && reach(false) == g.main_nodes.size();
}

namespace {

void check_orientation_invariants(const OrientedEnvironment& env) {
  const EnvironmentGraph& g = env.base;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    if (g.edge_in_main[e] && env.direction[e] == EdgeDir::Undirected)
      throw EnvError("main-area edge " + std::to_string(g.id_of(g.edges[e].a)) + "-" +
                     std::to_string(g.id_of(g.edges[e].b)) + " has no direction");
    if (!g.edge_in_main[e] && env.direction[e] != EdgeDir::Undirected)
      throw EnvError("marginal edge " + std::to_string(g.id_of(g.edges[e].a)) + "-" +
                     std::to_string(g.id_of(g.edges[e].b)) + " must stay undirected");
  }
  if (!verify_strong_connectivity(env))
    throw EnvError("oriented main area is not strongly connected");
}

}  // namespace

OrientedEnvironment load_oriented(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  EnvironmentGraph base = load_environment(json_text);

  OrientedEnvironment env;
  env.base = std::move(base);
  env.direction.assign(env.base.edges.size(), EdgeDir::Undirected);
  try {
    int i = 0;
    for (const auto& je : j.at("edges")) {
      std::string dir = je.contains("direction") ? je.at("direction").get<std::string>()
                                                 : std::string("undirected");
      NodeIndex a = env.base.index_of(je.at("a").get<NodeId>());
      // Edges are stored by load_environment in file order, so index i matches.
      const Edge& ed = env.base.edges[i];
      if (dir == "a_to_b") {
        env.direction[i] = (ed.a == a) ? EdgeDir::AToB : EdgeDir::BToA;
      } else if (dir != "undirected") {
        throw ParseError("unknown edge direction \"" + dir + "\"");
      }
      ++i;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad oriented-environment field: ") + e.what());
  }
  env.rebuild_adjacency();
  check_orientation_invariants(env);
  return env;
}

OrientedEnvironment load_oriented_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_oriented(ss.str());
}

std::string save_oriented(const OrientedEnvironment& env) {
  const EnvironmentGraph& g = env.base;
  json j;
  j["nodes"] = json::array();
  for (const Node& n : g.nodes) {
    const char* kind = n.is_task_endpoint() ? "task_endpoint" : n.is_parking() ? "parking" : "plain";
    j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"kind", kind}});
  }
  j["edges"] = json::array();
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const Edge& ed = g.edges[e];
    NodeIndex tail = ed.a, head = ed.b;
    if (env.direction[e] == EdgeDir::BToA) std::swap(tail, head);  // normalize to a -> b
    const char* dir = env.direction[e] == EdgeDir::Undirected ? "undirected" : "a_to_b";
    j["edges"].push_back({{"a", g.id_of(tail)}, {"b", g.id_of(head)}, {"direction", dir}});
  }
  return j.dump(2) + "\n";
}

}  // namespace mapdfs
