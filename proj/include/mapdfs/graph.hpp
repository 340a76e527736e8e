#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mapdfs {

// External node identifier, as written in environment files.
using NodeId = int;
// Dense index into EnvironmentGraph::nodes; everything past the I/O boundary
// works on indices. Nodes are sorted by id, so index order == id order.
using NodeIndex = int;

constexpr NodeIndex kNoNode = -1;

enum class NodeKind { Plain, TaskEndpoint, Parking };

struct Node {
  NodeId id = -1;
  double x = 0.0;
  double y = 0.0;
  NodeKind kind = NodeKind::Plain;

  bool is_task_endpoint() const { return kind == NodeKind::TaskEndpoint; }
  bool is_parking() const { return kind == NodeKind::Parking; }
};

struct Edge {
  NodeIndex a = kNoNode;
  NodeIndex b = kNoNode;

  NodeIndex other(NodeIndex n) const { return n == a ? b : a; }
};

// A maximal subgraph in which every pair of nodes lies on a common cycle.
// Single edges (bridges) do not qualify; they belong to tree areas.
struct BiComponent {
  std::vector<NodeIndex> nodes;  // ascending
  std::vector<int> edges;        // edge indices
};

// A pendant tree hanging off the main area. The root is the one main-area
// node the tree shares with it; `nodes` is the marginal part (root excluded).
struct TreeArea {
  NodeIndex root = kNoNode;
  std::vector<NodeIndex> nodes;  // ascending
  std::vector<int> edges;        // including the root attachment edge
  bool has_parking = false;
  bool has_task_endpoint = false;
};

// A marginal component whose attachment to the main area is not tree-shaped
// (zero or several attachment nodes).
struct Sc2Violation {
  std::vector<NodeIndex> nodes;
  std::vector<NodeIndex> attachments;
};

struct EnvironmentGraph {
  std::vector<Node> nodes;  // sorted by id
  std::vector<Edge> edges;

  // Derived structure, filled by compute_derived().
  std::vector<std::vector<std::pair<NodeIndex, int>>> adjacency;  // (neighbor, edge)
  std::vector<BiComponent> components;
  std::vector<char> in_main;         // per node
  std::vector<char> edge_in_main;    // per edge
  std::vector<NodeIndex> main_nodes; // ascending
  std::vector<TreeArea> trees;
  std::vector<NodeIndex> marginal_nodes;  // ascending
  std::vector<NodeIndex> roots;           // ascending
  std::vector<int> tree_of;               // node -> tree index, -1 for main nodes
  std::vector<int> root_tree;             // node -> tree index it roots, -1 otherwise
  std::vector<Sc2Violation> sc2_violations;

  NodeIndex index_of(NodeId id) const;
  NodeId id_of(NodeIndex n) const { return nodes[n].id; }
  int degree(NodeIndex n) const { return static_cast<int>(adjacency[n].size()); }
  bool is_main(NodeIndex n) const { return in_main[n] != 0; }
  bool is_root(NodeIndex n) const { return is_main(n) && root_tree[n] >= 0; }
};

struct ConditionResult {
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  ConditionResult sc1, sc2, sc3, ac1;
  int open_node_margin = 0;       // |V_main| - n_agents
  bool efficiency_warning = false;  // n_agents > |V_main| / 2

  bool all_pass() const { return sc1.pass && sc2.pass && sc3.pass && ac1.pass; }
};

// Error hierarchy for environment loading and structural checks.
struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : EnvError {
  using EnvError::EnvError;
};
struct ConsistencyError : EnvError {
  using EnvError::EnvError;
};
struct Sc2Error : EnvError {
  using EnvError::EnvError;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses an environment from JSON text and computes all derived fields.
// Rejects malformed input: bad JSON, unknown/duplicate ids, self-loops,
// duplicate edges, non-finite coordinates, disconnected graphs.
EnvironmentGraph load_environment(const std::string& json_text);
EnvironmentGraph load_environment_file(const std::string& path);
std::string save_environment(const EnvironmentGraph& g);

// Builds a graph from already-validated parts (tests and generators).
EnvironmentGraph make_environment(std::vector<Node> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

// Recomputes every derived field from nodes/edges.
void compute_derived(EnvironmentGraph& g);

// All maximal cycle-closed subgraphs, as node sets (ascending, sorted by
// smallest member). Throws ConsistencyError on a disconnected graph.
std::vector<std::vector<NodeIndex>> biconnected_components(const EnvironmentGraph& g);

// Components may pairwise share at most one node; true iff that holds.
bool check_component_intersections(const std::vector<std::vector<NodeIndex>>& components);

struct MarginalClassification {
  std::vector<TreeArea> trees;
  std::vector<NodeIndex> roots;
  std::vector<NodeIndex> marginal_nodes;
};

// Assigns every non-main node to a tree rooted at its single main-area
// attachment. Throws Sc2Error when an attachment is not tree-shaped.
MarginalClassification classify_marginal_zone(const EnvironmentGraph& g);

// Structural + agent-count report. Never throws; failures are entries.
ValidationReport validate(const EnvironmentGraph& g, int n_agents);

}  // namespace mapdfs
