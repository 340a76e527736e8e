#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mapdfs/graph.hpp"

namespace mapdfs {

enum class EdgeDir : uint8_t { Undirected, AToB, BToA };

// An environment whose main-area edges all carry one direction; marginal
// (tree) edges stay undirected and are traversable both ways.
struct OrientedEnvironment {
  EnvironmentGraph base;
  std::vector<EdgeDir> direction;  // parallel to base.edges

  // Outgoing adjacency respecting directions: (neighbor, edge index).
  std::vector<std::vector<std::pair<NodeIndex, int>>> out_adjacency;
  double max_edge_len = 0.0;  // planner heuristic scale

  bool can_traverse(NodeIndex from, NodeIndex to) const;
  // Directed out-neighbors of v within the main area, ascending.
  std::vector<NodeIndex> main_out_neighbors(NodeIndex v) const;
  void rebuild_adjacency();
};

// Strongly orients the main area with a single DFS (tree edges away from the
// root, back edges toward the ancestor). The seed picks the start node and
// the neighbor visiting order. Throws EnvError when SC1 fails or a bridge
// turns up inside the main area.
OrientedEnvironment orient_main_area(const EnvironmentGraph& g, uint64_t seed);

// True iff every ordered pair of main-area nodes is connected by a directed
// path that stays in the main area.
bool verify_strong_connectivity(const OrientedEnvironment& env);

// Oriented-environment file: the environment schema plus a per-edge
// "direction" of "a_to_b" or "undirected"; directed edges are normalized so
// the direction always reads a -> b.
OrientedEnvironment load_oriented(const std::string& json_text);
OrientedEnvironment load_oriented_file(const std::string& path);
std::string save_oriented(const OrientedEnvironment& env);

}  // namespace mapdfs
