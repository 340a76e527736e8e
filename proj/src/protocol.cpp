#include "mapdfs/protocol.hpp"

#include <algorithm>

namespace mapdfs {

NodeIndex facilitator_of(const CarrierState& c, const OrientedEnvironment& env) {
  const EnvironmentGraph& g = env.base;
  if (g.is_main(c.current)) return c.current;
  int t = g.tree_of[c.current];
  if (t < 0) throw ProtocolViolation("carrier is on a node outside both zones");
  return g.trees[t].root;
}

void ProtocolState::init(const OrientedEnvironment& environment) {
  env = &environment;
  const EnvironmentGraph& g = environment.base;
  node_agents.assign(g.nodes.size(), {});
  for (int v = 0; v < static_cast<int>(g.nodes.size()); ++v) node_agents[v].node = v;
  for (int t = 0; t < static_cast<int>(g.trees.size()); ++t) {
    NodeAgentState& root = node_agents[g.trees[t].root];
    root.has_gate = true;
    root.gate.tree = t;
    root.gate.parking = g.trees[t].has_parking;
  }
}

void ProtocolState::set_reservation(NodeIndex v, int agent) {
  NodeAgentState& na = node_agents[v];
  if (na.reserved_by >= 0 && na.reserved_by != agent)
    throw ProtocolViolation("node " + std::to_string(env->base.id_of(v)) +
                            " granted to agent " + std::to_string(agent) +
                            " while reserved by " + std::to_string(na.reserved_by));
  na.reserved_by = agent;
}

void ProtocolState::release(NodeIndex v, int agent) {
  NodeAgentState& na = node_agents[v];
  if (na.reserved_by != agent)
    throw ProtocolViolation("agent " + std::to_string(agent) + " released node " +
                            std::to_string(env->base.id_of(v)) + " it does not hold");
  na.reserved_by = -1;
}

void ProtocolState::mover_left_tree(NodeIndex root) {
  TreeGate& gate = node_agents[root].gate;
  if (!node_agents[root].has_gate || gate.movers <= 0)
    throw ProtocolViolation("tree occupancy underflow at root " +
                            std::to_string(env->base.id_of(root)));
  --gate.movers;
}

TickAction carrier_tick(const CarrierState& c, const OrientedEnvironment& env) {
  if (!c.has_next()) return {};
  NodeIndex next = c.next_node();
  const EnvironmentGraph& g = env.base;
  // An agent standing on its parking node asks the root for leave before its
  // first hop, even when that hop stays inside the marginal zone.
  if (g.nodes[c.current].is_parking()) return {TickAction::SendRequest, next};
  if (!g.is_main(c.current) && !g.is_main(next)) return {TickAction::LocalMove, next};
  return {TickAction::SendRequest, next};
}

namespace {

void log_msg(ProtocolState& st, MessageRecord rec) {
  if (!st.log) return;
  rec.t = st.now;
  st.log->push_back(std::move(rec));
}

void log_reply(ProtocolState& st, NodeIndex facilitator, const CarrierState& c, const Reply& r) {
  MessageRecord rec;
  rec.from = facilitator;
  rec.to_is_agent = true;
  rec.to = c.id;
  rec.kind = r.accepted ? MessageKind::Accept : MessageKind::Deny;
  if (!r.accepted) {
    rec.som = r.som;
    rec.has_som = true;
  }
  log_msg(st, rec);
}

Reply reply_accept(ProtocolState& st, NodeIndex facilitator, const CarrierState& c) {
  Reply r{true, {}};
  log_reply(st, facilitator, c, r);
  return r;
}

Reply reply_wait(ProtocolState& st, NodeIndex facilitator, const CarrierState& c) {
  Reply r{false, {SomKind::Wait, kNoNode}};
  log_reply(st, facilitator, c, r);
  return r;
}

Reply reply_detour(ProtocolState& st, NodeIndex facilitator, const CarrierState& c, NodeIndex alt) {
  Reply r{false, {SomKind::Detour, alt}};
  log_reply(st, facilitator, c, r);
  return r;
}

// Probe the facilitator's other outward main-area neighbors in random order;
// the first grant becomes the detour target. Nothing is reserved on failure.
Reply deny_with_som(ProtocolState& st, const CarrierState& c, NodeIndex facilitator,
                    NodeIndex exclude, Rng& rng) {
  std::vector<NodeIndex> candidates;
  for (NodeIndex w : st.env->main_out_neighbors(facilitator))
    if (w != exclude) candidates.push_back(w);
  rng.shuffle(candidates);
  for (NodeIndex w : candidates) {
    if (handle_reserve_query(st, w, c, facilitator)) return reply_detour(st, facilitator, c, w);
  }
  return reply_wait(st, facilitator, c);
}

}  // namespace

bool handle_reserve_query(ProtocolState& st, NodeIndex target, const CarrierState& requester,
                          NodeIndex facilitator) {
  log_msg(st, {.from = facilitator,
               .to = target,
               .kind = MessageKind::ReserveQuery,
               .subject = target,
               .about_agent = requester.id});
  NodeAgentState& na = st.at(target);
  if (na.reserved_by == requester.id)
    throw ProtocolViolation("agent " + std::to_string(requester.id) +
                            " re-queried a node it already holds");
  const bool grant = na.reserved_by < 0;
  if (grant) st.set_reservation(target, requester.id);
  log_msg(st, {.from = target,
               .to = facilitator,
               .kind = grant ? MessageKind::ReserveGrant : MessageKind::ReserveRefuse,
               .subject = target,
               .about_agent = requester.id});
  return grant;
}

Reply handle_request(ProtocolState& st, const CarrierState& requester, NodeIndex next, Rng& rng) {
  const EnvironmentGraph& g = st.env->base;
  NodeIndex fac = facilitator_of(requester, *st.env);
  log_msg(st, {.from_is_agent = true,
               .from = requester.id,
               .to = fac,
               .kind = MessageKind::Request,
               .subject = next,
               .path = requester.path});

  if (!g.is_main(requester.current) || !g.is_main(next))
    return tree_root_gate(st, requester, next, rng);

  // Ordinary main-area hop: the requester stands on its facilitator and must
  // still hold it.
  if (fac != requester.current)
    throw ProtocolViolation("main-area request not sent from the carrier's node");
  if (st.reservation(fac) != requester.id)
    throw ProtocolViolation("agent " + std::to_string(requester.id) +
                            " requested a move without holding node " +
                            std::to_string(g.id_of(fac)));
  if (handle_reserve_query(st, next, requester, fac)) return reply_accept(st, fac, requester);
  return deny_with_som(st, requester, fac, next, rng);
}

Reply tree_root_gate(ProtocolState& st, const CarrierState& requester, NodeIndex next, Rng& rng) {
  const EnvironmentGraph& g = st.env->base;

  if (g.is_main(requester.current)) {
    // Entry: the requester stands on the root and wants into the subtree.
    NodeIndex root = requester.current;
    NodeAgentState& ra = st.at(root);
    if (!ra.has_gate || g.tree_of[next] != ra.gate.tree)
      throw ProtocolViolation("tree entry request at node " + std::to_string(g.id_of(root)) +
                              " that does not root the target tree");
    if (ra.reserved_by != requester.id)
      throw ProtocolViolation("agent " + std::to_string(requester.id) +
                              " requested tree entry without holding the root");
    TreeGate& gate = ra.gate;
    if (gate.parking) {
      // One-way regime: entries only after the switch, one mover at a time.
      if (gate.phase != TreeGate::Dir::Inbound || gate.movers > 0)
        return reply_wait(st, root, requester);
      ++gate.movers;
      return reply_accept(st, root, requester);
    }
    if (gate.movers > 0) return deny_with_som(st, requester, root, next, rng);
    ++gate.movers;
    return reply_accept(st, root, requester);
  }

  // The requester is inside the tree; its facilitator is the root.
  NodeIndex root = facilitator_of(requester, *st.env);
  TreeGate& gate = st.at(root).gate;
  if (!st.at(root).has_gate) throw ProtocolViolation("tree has no gate at its root");

  const bool leaving_parked = g.nodes[requester.current].is_parking();
  if (leaving_parked) {
    // Leave permission. After the one-way switch a returned agent stays, but
    // an agent that still holds a task may always start its errand.
    const bool phase_allows = !gate.parking || gate.phase == TreeGate::Dir::Outbound ||
                              requester.task.has_value();
    if (!phase_allows || gate.movers > 0) return reply_wait(st, root, requester);
  }

  if (next == root) {
    // Stepping onto the root needs the root's own resource.
    if (!handle_reserve_query(st, root, requester, root)) return reply_wait(st, root, requester);
    if (leaving_parked) ++gate.movers;
    return reply_accept(st, root, requester);
  }

  // A deeper marginal hop only reaches the gate as a parked agent's first
  // move; everything else travels unconfirmed inside the marginal zone.
  if (!leaving_parked || g.is_main(next) || g.tree_of[next] != gate.tree)
    throw ProtocolViolation("unexpected in-tree request toward node " +
                            std::to_string(g.id_of(next)));
  ++gate.movers;
  return reply_accept(st, root, requester);
}

void parking_tree_phase_update(NodeAgentState& root, bool task_pool_empty) {
  if (!root.has_gate || !root.gate.parking) return;
  if (task_pool_empty) root.gate.phase = TreeGate::Dir::Inbound;
}

}  // namespace mapdfs
