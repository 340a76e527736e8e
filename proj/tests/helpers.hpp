#pragma once

#include <string>
#include <vector>

#include "mapdfs/orientation.hpp"

namespace mapdfs::testhelp {

inline Node node(NodeId id, double x, double y, NodeKind kind = NodeKind::Plain) {
  return {id, x, y, kind};
}

// Cycle 0-1-...-(n-1)-0 with nodes on a unit-ish circle.
inline EnvironmentGraph cycle_env(int n) {
  std::vector<Node> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 0; i < n; ++i) {
    nodes.push_back(node(i, 10.0 * i, i % 2 ? 5.0 : 0.0));
    edges.push_back({i, (i + 1) % n});
  }
  return make_environment(std::move(nodes), std::move(edges));
}

// Path 0-1-...-(n-1).
inline EnvironmentGraph path_env(int n) {
  std::vector<Node> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 0; i < n; ++i) {
    nodes.push_back(node(i, 10.0 * i, 0.0));
    if (i) edges.push_back({i - 1, i});
  }
  return make_environment(std::move(nodes), std::move(edges));
}

// Two triangles sharing node 2: {0,1,2} and {2,3,4}.
inline EnvironmentGraph two_triangles() {
  return make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8), node(3, 0, 16), node(4, 10, 16)},
      {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}});
}

// Forces every listed main edge into the given tail->head direction and
// leaves the rest undirected. Skips all validity checks on purpose.
inline OrientedEnvironment force_orientation(EnvironmentGraph g,
                                             const std::vector<std::pair<NodeId, NodeId>>& arcs) {
  OrientedEnvironment env;
  env.base = std::move(g);
  env.direction.assign(env.base.edges.size(), EdgeDir::Undirected);
  for (const auto& [tail_id, head_id] : arcs) {
    NodeIndex tail = env.base.index_of(tail_id);
    NodeIndex head = env.base.index_of(head_id);
    for (int e = 0; e < static_cast<int>(env.base.edges.size()); ++e) {
      const Edge& ed = env.base.edges[e];
      if (ed.a == tail && ed.b == head) env.direction[e] = EdgeDir::AToB;
      if (ed.b == tail && ed.a == head) env.direction[e] = EdgeDir::BToA;
    }
  }
  env.rebuild_adjacency();
  return env;
}

inline std::string data_file(const std::string& name) {
  return std::string(MAPDFS_DATA_DIR) + "/" + name;
}

}  // namespace mapdfs::testhelp
