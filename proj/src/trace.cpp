#include "mapdfs/trace.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mapdfs {

using nlohmann::json;

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Arrive: return "arrive";
    case EventKind::Depart: return "depart";
    case EventKind::LoadStart: return "load_start";
    case EventKind::LoadEnd: return "load_end";
    case EventKind::UnloadStart: return "unload_start";
    case EventKind::UnloadEnd: return "unload_end";
    case EventKind::Wait: return "wait";
    case EventKind::Detour: return "detour";
    case EventKind::TaskAssigned: return "task_assigned";
    case EventKind::TaskCompleted: return "task_completed";
    case EventKind::Parked: return "parked";
  }
  return "?";
}

namespace {

EventKind event_kind_from(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(EventKind::Parked); ++k) {
    if (s == event_kind_name(static_cast<EventKind>(k))) return static_cast<EventKind>(k);
  }
  throw TraceError("unknown event kind \"" + s + "\"");
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace, const EnvironmentGraph& g) {
  std::ostringstream os;
  for (const TraceEvent& ev : trace) {
    json j;
    j["t"] = ev.t;
    j["agent"] = ev.agent;
    j["kind"] = event_kind_name(ev.kind);
    if (ev.node != kNoNode) j["node"] = g.id_of(ev.node);
    if (ev.from != kNoNode) j["from"] = g.id_of(ev.from);
    if (ev.to != kNoNode) j["to"] = g.id_of(ev.to);
    if (ev.task >= 0) j["task"] = ev.task;
    os << j.dump() << "\n";
  }
  return os.str();
}

Trace trace_from_jsonl(const std::string& text, const EnvironmentGraph& g) {
  Trace trace;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto node_field = [&](const json& j, const char* key) {
    if (!j.contains(key)) return kNoNode;
    NodeIndex n = g.index_of(j.at(key).get<NodeId>());
    if (n == kNoNode)
      throw TraceError("line " + std::to_string(lineno) + ": unknown node id " +
                       j.at(key).dump());
    return n;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      TraceEvent ev;
      ev.t = j.at("t").get<long long>();
      ev.agent = j.at("agent").get<int>();
      ev.kind = event_kind_from(j.at("kind").get<std::string>());
      ev.node = node_field(j, "node");
      ev.from = node_field(j, "from");
      ev.to = node_field(j, "to");
      ev.task = j.contains("task") ? j.at("task").get<int>() : -1;
      trace.push_back(ev);
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

Trace trace_from_file(const std::string& path, const EnvironmentGraph& g) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_jsonl(ss.str(), g);
}

namespace {

const char* message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Request: return "request";
    case MessageKind::ReserveQuery: return "reserve_query";
    case MessageKind::ReserveGrant: return "reserve_grant";
    case MessageKind::ReserveRefuse: return "reserve_refuse";
    case MessageKind::Accept: return "accept";
    case MessageKind::Deny: return "deny";
  }
  return "?";
}

std::string endpoint_name(bool is_agent, int id, const EnvironmentGraph& g) {
  if (is_agent) return "agent:" + std::to_string(id);
  return "node:" + std::to_string(g.id_of(id));
}

}  // namespace

std::string messages_to_jsonl(const MessageLog& log, const EnvironmentGraph& g) {
  std::ostringstream os;
  for (const MessageRecord& m : log) {
    json j;
    j["t"] = m.t;
    j["sender"] = endpoint_name(m.from_is_agent, m.from, g);
    j["receiver"] = endpoint_name(m.to_is_agent, m.to, g);
    j["kind"] = message_kind_name(m.kind);
    if (m.subject != kNoNode) j["node"] = g.id_of(m.subject);
    if (m.about_agent >= 0) j["agent"] = m.about_agent;
    if (m.has_som) {
      j["som"] = m.som.kind == SomKind::Wait ? "wait" : "detour";
      if (m.som.kind == SomKind::Detour) j["alternative"] = g.id_of(m.som.alternative);
    }
    if (!m.path.empty()) {
      json p = json::array();
      for (NodeIndex v : m.path) p.push_back(g.id_of(v));
      j["path"] = p;
    }
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace mapdfs
