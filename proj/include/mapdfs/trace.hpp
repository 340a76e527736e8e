#pragma once

#include <string>
#include <vector>

#include "mapdfs/orientation.hpp"
#include "mapdfs/protocol.hpp"

namespace mapdfs {

enum class EventKind : uint8_t {
  Arrive,  // also marks the initial position at t=0 (no preceding depart)
  Depart,
  LoadStart,
  LoadEnd,
  UnloadStart,
  UnloadEnd,
  Wait,
  Detour,
  TaskAssigned,
  TaskCompleted,
  Parked,
};

struct TraceEvent {
  long long t = 0;
  int agent = -1;
  EventKind kind = EventKind::Arrive;
  NodeIndex node = kNoNode;  // at-node events and arrivals
  NodeIndex from = kNoNode;  // depart/detour
  NodeIndex to = kNoNode;    // depart/detour
  int task = -1;             // task lifecycle events
};

using Trace = std::vector<TraceEvent>;

struct TraceError : EnvError {
  using EnvError::EnvError;
};

const char* event_kind_name(EventKind k);

// Line-delimited JSON, one event per line, node fields as file ids.
std::string trace_to_jsonl(const Trace& trace, const EnvironmentGraph& g);
Trace trace_from_jsonl(const std::string& text, const EnvironmentGraph& g);
Trace trace_from_file(const std::string& path, const EnvironmentGraph& g);

// Line-delimited JSON for the protocol message log.
std::string messages_to_jsonl(const MessageLog& log, const EnvironmentGraph& g);

}  // namespace mapdfs
