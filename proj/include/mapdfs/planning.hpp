#pragma once

#include <vector>

#include "mapdfs/orientation.hpp"

namespace mapdfs {

// A node sequence; consecutive nodes are joined by an edge traversable in
// that order. A single node is the path from a node to itself.
using Path = std::vector<NodeIndex>;

struct PathError : EnvError {
  using EnvError::EnvError;
};

// Minimum-hop direction-respecting path. Ignores every agent and all time
// information; A* over hop counts with a straight-line heuristic scaled by
// the longest edge (falls back to uniform-cost search when all coordinates
// coincide). Ties broken toward smaller node indices. Throws PathError when
// the target is unreachable.
Path shortest_path(const OrientedEnvironment& env, NodeIndex from, NodeIndex to);

// Fresh plan after a detour; nothing is blacklisted, so the new path may
// re-enter the node that was just denied.
Path replan_from(const OrientedEnvironment& env, NodeIndex detour_node, NodeIndex destination);

}  // namespace mapdfs
