#include "mapdfs/planning.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mapdfs {

namespace {

double euclid(const Node& a, const Node& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

Path shortest_path(const OrientedEnvironment& env, NodeIndex from, NodeIndex to) {
  const auto& g = env.base;
  if (from < 0 || from >= static_cast<int>(g.nodes.size()) || to < 0 ||
      to >= static_cast<int>(g.nodes.size()))
    throw PathError("shortest_path: node out of range");
  if (from == to) return {from};

  const double scale = env.max_edge_len;
  auto h = [&](NodeIndex v) {
    return scale > 0.0 ? euclid(g.nodes[v], g.nodes[to]) / scale : 0.0;
  };

  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> dist(n, -1);
  std::vector<NodeIndex> parent(n, kNoNode);
  std::vector<char> closed(n, 0);
  // (f, node): ties resolve toward the smaller node index.
  using QItem = std::pair<double, NodeIndex>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> open;
  dist[from] = 0;
  open.push({h(from), from});

  while (!open.empty()) {
    auto [f, v] = open.top();
    open.pop();
    if (closed[v]) continue;
    closed[v] = 1;
    if (v == to) break;
    for (const auto& [w, e] : env.out_adjacency[v]) {
      int nd = dist[v] + 1;
      if (dist[w] < 0 || nd < dist[w]) {
        dist[w] = nd;
        parent[w] = v;
        open.push({nd + h(w), w});
      }
    }
  }

  if (dist[to] < 0)
    throw PathError("no path from node " + std::to_string(g.id_of(from)) + " to " +
                    std::to_string(g.id_of(to)));
  Path p;
  for (NodeIndex v = to; v != kNoNode; v = parent[v]) p.push_back(v);
  std::reverse(p.begin(), p.end());
  return p;
}

Path replan_from(const OrientedEnvironment& env, NodeIndex detour_node, NodeIndex destination) {
  return shortest_path(env, detour_node, destination);
}

}  // namespace mapdfs
