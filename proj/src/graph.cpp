#include "mapdfs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mapdfs {

using nlohmann::json;

NodeIndex EnvironmentGraph::index_of(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const Node& n, NodeId v) { return n.id < v; });
  if (it == nodes.end() || it->id != id) return kNoNode;
  return static_cast<NodeIndex>(it - nodes.begin());
}

namespace {

std::string ids_to_string(const EnvironmentGraph& g, const std::vector<NodeIndex>& nodes) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < nodes.size(); ++i) os << (i ? "," : "") << g.id_of(nodes[i]);
  os << "}";
  return os.str();
}

// Hopcroft-Tarjan DFS partitioning edges into classic biconnected components.
// One-edge components are bridges; they are returned too and filtered by the
// caller, since the cycle-based definition excludes them from the main area.
struct BicompDfs {
  const EnvironmentGraph& g;
  std::vector<int> disc, low;
  std::vector<int> edge_stack;
  std::vector<BiComponent> raw;
  int timer = 0;

  explicit BicompDfs(const EnvironmentGraph& graph)
      : g(graph),
        disc(graph.nodes.size(), -1),
        low(graph.nodes.size(), -1) {}

  void pop_component(int until_edge) {
    BiComponent c;
    std::set<NodeIndex> seen;
    for (;;) {
      int e = edge_stack.back();
      edge_stack.pop_back();
      c.edges.push_back(e);
      seen.insert(g.edges[e].a);
      seen.insert(g.edges[e].b);
      if (e == until_edge) break;
    }
    c.nodes.assign(seen.begin(), seen.end());
    raw.push_back(std::move(c));
  }

  void dfs(NodeIndex v, int parent_edge) {
    disc[v] = low[v] = timer++;
    for (const auto& [w, e] : g.adjacency[v]) {
      if (e == parent_edge) continue;
      if (disc[w] < 0) {
        edge_stack.push_back(e);
        dfs(w, e);
        low[v] = std::min(low[v], low[w]);
        if (low[w] >= disc[v]) pop_component(e);
      } else if (disc[w] < disc[v]) {
        edge_stack.push_back(e);
        low[v] = std::min(low[v], disc[w]);
      }
    }
  }

  // Runs from node 0; returns false when the graph is disconnected.
  bool run() {
    if (g.nodes.empty()) return true;
    dfs(0, -1);
    return std::all_of(disc.begin(), disc.end(), [](int d) { return d >= 0; });
  }
};

std::vector<BiComponent> cycle_components(const EnvironmentGraph& g) {
  BicompDfs dfs(g);
  if (!dfs.run()) throw ConsistencyError("graph is not connected");
  std::vector<BiComponent> out;
  for (auto& c : dfs.raw) {
    if (c.edges.size() >= 2) out.push_back(std::move(c));  // a bridge is not a component
  }
  std::sort(out.begin(), out.end(),
            [](const BiComponent& a, const BiComponent& b) { return a.nodes.front() < b.nodes.front(); });
  return out;
}

}  // namespace

void compute_derived(EnvironmentGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  g.adjacency.assign(n, {});
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    g.adjacency[g.edges[e].a].push_back({g.edges[e].b, e});
    g.adjacency[g.edges[e].b].push_back({g.edges[e].a, e});
  }
  for (auto& adj : g.adjacency)
    std::sort(adj.begin(), adj.end());

  g.components = cycle_components(g);

  g.in_main.assign(n, 0);
  g.edge_in_main.assign(g.edges.size(), 0);
  for (const auto& c : g.components) {
    for (NodeIndex v : c.nodes) g.in_main[v] = 1;
    for (int e : c.edges) g.edge_in_main[e] = 1;
  }
  g.main_nodes.clear();
  for (int v = 0; v < n; ++v)
    if (g.in_main[v]) g.main_nodes.push_back(v);

  // Group the non-main nodes into connected pendants and find where each
  // pendant touches the main area.
  g.trees.clear();
  g.sc2_violations.clear();
  g.tree_of.assign(n, -1);
  g.root_tree.assign(n, -1);
  g.marginal_nodes.clear();
  g.roots.clear();

  std::vector<char> visited(n, 0);
  std::map<NodeIndex, TreeArea> tree_by_root;  // pendants sharing a root merge
  for (int start = 0; start < n; ++start) {
    if (g.in_main[start] || visited[start]) continue;
    std::vector<NodeIndex> stack{start}, comp;
    std::set<NodeIndex> attachments;
    std::set<int> comp_edges;
    visited[start] = 1;
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (const auto& [w, e] : g.adjacency[v]) {
        comp_edges.insert(e);
        if (g.in_main[w]) {
          attachments.insert(w);
        } else if (!visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    if (attachments.size() == 1) {
      TreeArea& t = tree_by_root[*attachments.begin()];
      t.root = *attachments.begin();
      t.nodes.insert(t.nodes.end(), comp.begin(), comp.end());
      t.edges.insert(t.edges.end(), comp_edges.begin(), comp_edges.end());
    } else {
      g.sc2_violations.push_back(
          {comp, std::vector<NodeIndex>(attachments.begin(), attachments.end())});
    }
  }

  for (auto& [root, tree] : tree_by_root) {
    std::sort(tree.nodes.begin(), tree.nodes.end());
    std::sort(tree.edges.begin(), tree.edges.end());
    for (NodeIndex v : tree.nodes) {
      tree.has_parking |= g.nodes[v].is_parking();
      tree.has_task_endpoint |= g.nodes[v].is_task_endpoint();
    }
    int idx = static_cast<int>(g.trees.size());
    for (NodeIndex v : tree.nodes) g.tree_of[v] = idx;
    g.root_tree[root] = idx;
    g.roots.push_back(root);
    g.marginal_nodes.insert(g.marginal_nodes.end(), tree.nodes.begin(), tree.nodes.end());
    g.trees.push_back(std::move(tree));
  }
  std::sort(g.marginal_nodes.begin(), g.marginal_nodes.end());
}

std::vector<std::vector<NodeIndex>> biconnected_components(const EnvironmentGraph& g) {
  std::vector<std::vector<NodeIndex>> out;
  for (const auto& c : cycle_components(g)) out.push_back(c.nodes);
  return out;
}

bool check_component_intersections(const std::vector<std::vector<NodeIndex>>& components) {
  for (size_t i = 0; i < components.size(); ++i) {
    for (size_t j = i + 1; j < components.size(); ++j) {
      std::vector<NodeIndex> inter;
      std::set_intersection(components[i].begin(), components[i].end(),
                            components[j].begin(), components[j].end(),
                            std::back_inserter(inter));
      if (inter.size() > 1) return false;
    }
  }
  return true;
}

MarginalClassification classify_marginal_zone(const EnvironmentGraph& g) {
  if (!g.sc2_violations.empty()) {
    const auto& v = g.sc2_violations.front();
    throw Sc2Error("marginal nodes " + ids_to_string(g, v.nodes) +
                   " attach to the main area at " + ids_to_string(g, v.attachments) +
                   " (need exactly one tree root)");
  }
  return {g.trees, g.roots, g.marginal_nodes};
}

namespace {

// Connectivity of the main area as a subgraph (main nodes + component edges).
bool main_area_connected(const EnvironmentGraph& g) {
  if (g.main_nodes.empty()) return false;
  std::set<NodeIndex> seen;
  std::vector<NodeIndex> stack{g.main_nodes.front()};
  seen.insert(stack.front());
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (const auto& [w, e] : g.adjacency[v]) {
      if (!g.edge_in_main[e] || seen.count(w)) continue;
      seen.insert(w);
      stack.push_back(w);
    }
  }
  return seen.size() == g.main_nodes.size();
}

}  // namespace

ValidationReport validate(const EnvironmentGraph& g, int n_agents) {
  ValidationReport r;
  std::ostringstream os;

  if (g.main_nodes.empty()) {
    r.sc1 = {false, "main area is empty (no cycle in the graph)"};
  } else if (!main_area_connected(g)) {
    r.sc1 = {false, "main area is disconnected"};
  } else {
    os << g.main_nodes.size() << " main nodes in " << g.components.size() << " component(s)";
    r.sc1 = {true, os.str()};
  }

  if (g.sc2_violations.empty()) {
    os.str("");
    os << g.trees.size() << " tree(s), " << g.marginal_nodes.size() << " marginal node(s)";
    r.sc2 = {true, os.str()};
  } else {
    const auto& v = g.sc2_violations.front();
    r.sc2 = {false, "marginal nodes " + ids_to_string(g, v.nodes) + " attach at " +
                        ids_to_string(g, v.attachments)};
  }

  r.sc3 = {true, "parking nodes are tree leaves, no endpoints in parking trees"};
  for (int v = 0; v < static_cast<int>(g.nodes.size()); ++v) {
    if (!g.nodes[v].is_parking()) continue;
    if (g.in_main[v]) {
      r.sc3 = {false, "parking node " + std::to_string(g.id_of(v)) + " is in the main area"};
      break;
    }
    if (g.degree(v) != 1) {
      r.sc3 = {false, "parking node " + std::to_string(g.id_of(v)) + " is not a tree end node"};
      break;
    }
    int t = g.tree_of[v];
    if (t >= 0 && g.trees[t].has_task_endpoint) {
      r.sc3 = {false, "tree rooted at " + std::to_string(g.id_of(g.trees[t].root)) +
                          " mixes parking nodes and task endpoints"};
      break;
    }
  }

  const int main_count = static_cast<int>(g.main_nodes.size());
  r.open_node_margin = main_count - n_agents;
  os.str("");
  if (r.open_node_margin >= 2) {
    os << n_agents << " agents, margin " << r.open_node_margin;
    r.ac1 = {true, os.str()};
  } else {
    os << n_agents << " agents exceed " << main_count << " - 2 main nodes";
    r.ac1 = {false, os.str()};
  }
  r.efficiency_warning = 2 * n_agents > main_count;
  return r;
}

namespace {

NodeKind parse_kind(const std::string& s) {
  if (s == "plain") return NodeKind::Plain;
  if (s == "task_endpoint") return NodeKind::TaskEndpoint;
  if (s == "parking") return NodeKind::Parking;
  throw ParseError("unknown node kind \"" + s + "\"");
}

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::TaskEndpoint: return "task_endpoint";
    case NodeKind::Parking: return "parking";
    default: return "plain";
  }
}

}  // namespace

EnvironmentGraph make_environment(std::vector<Node> nodes,
                                  std::vector<std::pair<NodeId, NodeId>> edges) {
  EnvironmentGraph g;
  if (nodes.empty()) throw ConsistencyError("environment has no nodes");
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i].id == nodes[i + 1].id)
      throw ConsistencyError("duplicate node id " + std::to_string(nodes[i].id));
  }
  for (const Node& nd : nodes) {
    if (!std::isfinite(nd.x) || !std::isfinite(nd.y))
      throw ConsistencyError("non-finite coordinates on node " + std::to_string(nd.id));
  }
  g.nodes = std::move(nodes);

  std::set<std::pair<NodeIndex, NodeIndex>> seen_pairs;
  for (const auto& [ia, ib] : edges) {
    NodeIndex a = g.index_of(ia), b = g.index_of(ib);
    if (a == kNoNode || b == kNoNode)
      throw ConsistencyError("edge references unknown node id " +
                             std::to_string(a == kNoNode ? ia : ib));
    if (a == b) throw ConsistencyError("self-loop on node " + std::to_string(ia));
    auto key = std::minmax(a, b);
    if (!seen_pairs.insert(key).second)
      throw ConsistencyError("duplicate edge between " + std::to_string(ia) + " and " +
                             std::to_string(ib));
    g.edges.push_back({a, b});
  }
  compute_derived(g);
  return g;
}

EnvironmentGraph load_environment(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
      throw ParseError("environment must be an object with \"nodes\" and \"edges\"");
    std::vector<Node> nodes;
    for (const auto& jn : j.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<NodeId>();
      n.x = jn.at("x").get<double>();
      n.y = jn.at("y").get<double>();
      n.kind = jn.contains("kind") ? parse_kind(jn.at("kind").get<std::string>()) : NodeKind::Plain;
      nodes.push_back(n);
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& je : j.at("edges"))
      edges.push_back({je.at("a").get<NodeId>(), je.at("b").get<NodeId>()});
    return make_environment(std::move(nodes), std::move(edges));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad environment field: ") + e.what());
  }
}

EnvironmentGraph load_environment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_environment(ss.str());
}

std::string save_environment(const EnvironmentGraph& g) {
  json j;
  j["nodes"] = json::array();
  for (const Node& n : g.nodes)
    j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"kind", kind_name(n.kind)}});
  j["edges"] = json::array();
  for (const Edge& e : g.edges)
    j["edges"].push_back({{"a", g.id_of(e.a)}, {"b", g.id_of(e.b)}});
  return j.dump(2) + "\n";
}

}  // namespace mapdfs
