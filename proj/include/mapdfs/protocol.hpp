#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mapdfs/planning.hpp"
#include "mapdfs/rng.hpp"

namespace mapdfs {

// A move task: load `material` at `pickup`, carry it to `delivery`.
struct Task {
  int id = -1;
  NodeIndex pickup = kNoNode;
  NodeIndex delivery = kNoNode;
  int material = -1;
};

enum class SomKind : uint8_t { Wait, Detour };

// Suggestion of movement attached to a denial: stay one more timestep, or
// move to an already-reserved alternative neighbor and replan from there.
struct Som {
  SomKind kind = SomKind::Wait;
  NodeIndex alternative = kNoNode;  // Detour only; main-area out-neighbor
};

struct Reply {
  bool accepted = false;
  Som som;
};

enum class MessageKind : uint8_t {
  Request,        // carrier -> facilitator, carries the full path
  ReserveQuery,   // facilitator -> neighboring node agent
  ReserveGrant,   // node agent -> facilitator
  ReserveRefuse,  // node agent -> facilitator
  Accept,         // facilitator -> carrier
  Deny,           // facilitator -> carrier, carries the SOM
};

// One protocol message, as exported to the message trace. Carrier endpoints
// are agent ids, node-agent endpoints are node indices.
struct MessageRecord {
  long long t = 0;
  bool from_is_agent = false;
  int from = -1;  // agent id or node index
  bool to_is_agent = false;
  int to = -1;
  MessageKind kind = MessageKind::Request;
  NodeIndex subject = kNoNode;  // requested/queried node
  int about_agent = -1;         // agent a reservation is asked for
  Som som;                      // Deny only
  bool has_som = false;
  Path path;                    // Request only
};

using MessageLog = std::vector<MessageRecord>;

// Root-side bookkeeping for one pendant tree. `movers` counts the non-parked
// agents strictly inside the subtree, including those still on a tree edge.
struct TreeGate {
  int tree = -1;
  bool parking = false;
  int movers = 0;
  enum class Dir : uint8_t { Outbound, Inbound } phase = Dir::Outbound;
};

// Per-node reservation holder. The holder is the agent standing on the node
// or already granted it for arrival; it is cleared the moment the holder
// commits to its next hop, which is what makes a departing occupant's node
// grantable to a follower within the same timestep. Message ordering is the
// engine's deterministic dispatch (agent-id order within a timestep), which
// realizes the one-by-one inbox consumption the node agents assume.
struct NodeAgentState {
  NodeIndex node = kNoNode;
  int reserved_by = -1;
  bool has_gate = false;
  TreeGate gate;
};

enum class Phase : uint8_t { ToPickup, ToDelivery, ToParking, Parked };

struct CarrierState {
  int id = -1;
  Phase phase = Phase::Parked;
  NodeIndex current = kNoNode;
  Path path;            // path[path_pos] == current while idle at a node
  size_t path_pos = 0;
  std::optional<Task> task;
  NodeIndex reserved_next = kNoNode;  // granted next main-area node, if any
  NodeIndex parking_node = kNoNode;   // own parking leaf; kNoNode when none exist

  // Engine bookkeeping.
  long long busy_until = 0;
  bool in_transit = false;
  NodeIndex transit_from = kNoNode;
  NodeIndex transit_to = kNoNode;
  bool loading = false;    // load in progress, ends at busy_until
  bool unloading = false;  // unload in progress, ends at busy_until

  bool has_next() const { return path_pos + 1 < path.size(); }
  NodeIndex next_node() const { return path[path_pos + 1]; }
};

// The facilitator a carrier talks to: its own node inside the main area, or
// the root of the tree it is in.
NodeIndex facilitator_of(const CarrierState& c, const OrientedEnvironment& env);

struct ProtocolViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All node agents of one running instance.
struct ProtocolState {
  const OrientedEnvironment* env = nullptr;
  std::vector<NodeAgentState> node_agents;  // indexed by NodeIndex
  MessageLog* log = nullptr;                // optional message trace
  long long now = 0;

  void init(const OrientedEnvironment& environment);
  NodeAgentState& at(NodeIndex v) { return node_agents[v]; }
  const NodeAgentState& at(NodeIndex v) const { return node_agents[v]; }

  int reservation(NodeIndex v) const { return node_agents[v].reserved_by; }
  void set_reservation(NodeIndex v, int agent);
  void release(NodeIndex v, int agent);

  // Gate transitions driven by physical movement.
  void mover_entered_tree(NodeIndex root);
  void mover_left_tree(NodeIndex root);
};

// Both carrier-side steps of one decision round. carrier_tick says what the
// carrier does next; the engine then either performs the free marginal move
// or routes a Request through handle_request.
struct TickAction {
  enum Kind { Idle, LocalMove, SendRequest } kind = Idle;
  NodeIndex next = kNoNode;
};
TickAction carrier_tick(const CarrierState& c, const OrientedEnvironment& env);

// Reservation answer of a single node agent: grant iff nobody holds the node.
// An occupant that has not secured its own next hop still holds it, so the
// query is refused exactly in the "not decided to move" case.
bool handle_reserve_query(ProtocolState& st, NodeIndex target, const CarrierState& requester,
                          NodeIndex facilitator);

// Facilitator handling of a carrier Request for a main-area target: ask the
// target first; on refusal probe the remaining outward neighbors in seeded
// random order for a detour; otherwise deny with wait. A denial never leaves
// a fresh reservation behind.
Reply handle_request(ProtocolState& st, const CarrierState& requester, NodeIndex next, Rng& rng);

// Root behavior for requests that enter or leave its subtree, including the
// leave-permission rule for parked agents and the one-way phase of parking
// trees.
Reply tree_root_gate(ProtocolState& st, const CarrierState& requester, NodeIndex next, Rng& rng);

// Parking-tree roots start outbound (exits only) and switch to inbound
// (entries only) when the task pool runs dry; after the switch a returned
// agent cannot leave again.
void parking_tree_phase_update(NodeAgentState& root, bool task_pool_empty);

}  // namespace mapdfs
