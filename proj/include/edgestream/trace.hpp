#pragma once

// Timestamped life-cycle events, their CSV form, and validators that replay
// a trace through the core state machine. Simulator and agent sessions emit
// the same schema, so one validator covers both.
//
// CSV schema: time,doc_index,event,detail
//   arrive            detail = original size in bytes
//   proc_start_prio   detail = estimated ratio at selection time
//   proc_start_search detail = estimated ratio at selection time
//   proc_end          detail = measured ratio (bytes per CPU second)
//   upload_start      detail = bytes being uploaded
//   upload_end        detail = bytes uploaded

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgestream/core.hpp"
#include "edgestream/csv.hpp"

namespace edgestream {

enum class TraceKind {
  Arrive,
  ProcStartPrio,
  ProcStartSearch,
  ProcEnd,
  UploadStart,
  UploadEnd,
};

inline const char* to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Arrive: return "arrive";
    case TraceKind::ProcStartPrio: return "proc_start_prio";
    case TraceKind::ProcStartSearch: return "proc_start_search";
    case TraceKind::ProcEnd: return "proc_end";
    case TraceKind::UploadStart: return "upload_start";
    case TraceKind::UploadEnd: return "upload_end";
  }
  return "unknown";
}

inline std::optional<TraceKind> parse_trace_kind(std::string_view name) {
  if (name == "arrive") return TraceKind::Arrive;
  if (name == "proc_start_prio") return TraceKind::ProcStartPrio;
  if (name == "proc_start_search") return TraceKind::ProcStartSearch;
  if (name == "proc_end") return TraceKind::ProcEnd;
  if (name == "upload_start") return TraceKind::UploadStart;
  if (name == "upload_end") return TraceKind::UploadEnd;
  return std::nullopt;
}

struct TraceEvent {
  double time = 0.0;
  std::uint32_t doc_index = 0;
  TraceKind kind = TraceKind::Arrive;
  double detail = 0.0;
};

inline void write_trace_csv(std::ostream& out, std::span<const TraceEvent> trace) {
  out << "time,doc_index,event,detail\n";
  for (const TraceEvent& ev : trace) {
    out << format_double(ev.time) << ',' << ev.doc_index << ',' << to_string(ev.kind) << ','
        << format_double(ev.detail) << '\n';
  }
}

inline std::vector<TraceEvent> read_trace_csv(std::istream& in) {
  std::vector<TraceEvent> trace;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != "time,doc_index,event,detail") {
        throw ParseError(1, "bad trace header: '" + line + "'");
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 4) throw ParseError(line_number, "expected 4 columns");
    auto kind = parse_trace_kind(fields[2]);
    if (!kind) throw ParseError(line_number, "unknown event '" + fields[2] + "'");
    trace.push_back(TraceEvent{parse_double(fields[0], line_number, "time"),
                               parse_u32(fields[1], line_number, "doc_index"), *kind,
                               parse_double(fields[3], line_number, "detail")});
  }
  return trace;
}

struct TraceInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Replays the trace through the core state machine. Checks, per document:
// exactly one arrive (first), at most one proc_start/proc_end pair, exactly
// one upload_start/upload_end pair, edges legal; globally: times
// non-decreasing and concurrency within max_processing / max_uploading.
// Throws TraceInvalid with the offending event.
inline void validate_lifecycle(std::span<const TraceEvent> trace, std::size_t max_processing,
                               std::size_t max_uploading) {
  std::map<std::uint32_t, Document> docs;
  std::size_t processing = 0;
  std::size_t uploading = 0;
  double last_time = 0.0;
  bool first = true;

  auto fail = [](const TraceEvent& ev, const std::string& why) {
    throw TraceInvalid("event '" + std::string(to_string(ev.kind)) + "' for document " +
                       std::to_string(ev.doc_index) + " at t=" + std::to_string(ev.time) +
                       ": " + why);
  };

  for (const TraceEvent& ev : trace) {
    if (!first && ev.time < last_time) fail(ev, "timestamps decreasing");
    last_time = ev.time;
    first = false;

    if (ev.kind == TraceKind::Arrive) {
      if (docs.count(ev.doc_index)) fail(ev, "duplicate arrival");
      Document doc;
      doc.index = ev.doc_index;
      doc.arrival_time = ev.time;
      doc.original_size = static_cast<std::uint64_t>(ev.detail);
      docs.emplace(ev.doc_index, doc);
      continue;
    }

    auto it = docs.find(ev.doc_index);
    if (it == docs.end()) fail(ev, "event before arrival");
    Document& doc = it->second;
    try {
      switch (ev.kind) {
        case TraceKind::ProcStartPrio:
        case TraceKind::ProcStartSearch:
          doc = transition(doc, {LifecycleEventKind::StartProcessing, ev.time});
          ++processing;
          if (processing > max_processing) fail(ev, "processing slots exceeded");
          break;
        case TraceKind::ProcEnd:
          // The validator checks the state machine, not the measurement;
          // feed placeholder size/cost that satisfy the invariants.
          doc = transition(doc, {LifecycleEventKind::ProcessingDone, ev.time,
                                 std::max<std::uint64_t>(doc.original_size, 1), 1.0});
          --processing;
          break;
        case TraceKind::UploadStart:
          doc = transition(doc, {LifecycleEventKind::StartUpload, ev.time});
          ++uploading;
          if (uploading > max_uploading) fail(ev, "upload slots exceeded");
          break;
        case TraceKind::UploadEnd:
          doc = transition(doc, {LifecycleEventKind::UploadDone, ev.time});
          --uploading;
          break;
        case TraceKind::Arrive:
          break;
      }
    } catch (const IllegalTransition& e) {
      fail(ev, e.what());
    }
  }
}

// Requires every arrived document to have reached Uploaded.
inline void validate_complete(std::span<const TraceEvent> trace, std::size_t max_processing,
                              std::size_t max_uploading) {
  validate_lifecycle(trace, max_processing, max_uploading);
  std::map<std::uint32_t, int> phase;  // arrive=1, upload_end=2
  for (const TraceEvent& ev : trace) {
    if (ev.kind == TraceKind::Arrive) phase[ev.doc_index] = 1;
    if (ev.kind == TraceKind::UploadEnd) phase[ev.doc_index] = 2;
  }
  for (auto& [index, p] : phase) {
    if (p != 2) {
      throw TraceInvalid("document " + std::to_string(index) + " never reached uploaded");
    }
  }
}

// Simulator-only invariant: between event batches the link is never idle
// while any document sits in a Queued state and an upload slot is free.
// Events emitted at one timestamp form a batch; the state is checked after
// each batch completes.
inline void validate_non_idling(std::span<const TraceEvent> trace, std::size_t max_uploading) {
  std::map<std::uint32_t, DocumentState> state;
  std::size_t uploading = 0;

  auto check = [&](double t) {
    if (uploading >= max_uploading) return;
    for (auto& [index, s] : state) {
      if (s == DocumentState::QueuedUnprocessed || s == DocumentState::QueuedProcessed) {
        throw TraceInvalid("link idle slot while document " + std::to_string(index) +
                           " queued at t=" + std::to_string(t));
      }
    }
  };

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& ev = trace[i];
    switch (ev.kind) {
      case TraceKind::Arrive: state[ev.doc_index] = DocumentState::QueuedUnprocessed; break;
      case TraceKind::ProcStartPrio:
      case TraceKind::ProcStartSearch: state[ev.doc_index] = DocumentState::Processing; break;
      case TraceKind::ProcEnd: state[ev.doc_index] = DocumentState::QueuedProcessed; break;
      case TraceKind::UploadStart:
        state[ev.doc_index] = DocumentState::Uploading;
        ++uploading;
        break;
      case TraceKind::UploadEnd:
        state[ev.doc_index] = DocumentState::Uploaded;
        --uploading;
        break;
    }
    bool batch_end = (i + 1 == trace.size()) || (trace[i + 1].time != ev.time);
    if (batch_end) check(ev.time);
  }
}

}  // namespace edgestream
