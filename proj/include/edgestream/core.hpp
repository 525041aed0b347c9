#pragma once

// Domain types and the document life-cycle state machine shared by the
// simulator and the real-mode agent.
//
// A document moves through exactly one path of
//
//   Queued(unprocessed) -> Processing -> Queued(processed) -> Uploading -> Uploaded
//   Queued(unprocessed) ----------------------------------> Uploading -> Uploaded
//
// Uploaded is terminal: an uploaded document is never processed, and a
// document never holds a CPU slot and an upload slot at the same time.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace edgestream {

// A scheduler tried an edge that does not exist in the life-cycle graph.
// This always signals an engine bug and must abort the run.
struct IllegalTransition : std::logic_error {
  using std::logic_error::logic_error;
};

struct NotYetProcessed : std::logic_error {
  using std::logic_error::logic_error;
};

enum class DocumentState {
  QueuedUnprocessed,
  Processing,
  QueuedProcessed,
  Uploading,
  Uploaded,
};

inline const char* to_string(DocumentState state) {
  switch (state) {
    case DocumentState::QueuedUnprocessed: return "queued_unprocessed";
    case DocumentState::Processing: return "processing";
    case DocumentState::QueuedProcessed: return "queued_processed";
    case DocumentState::Uploading: return "uploading";
    case DocumentState::Uploaded: return "uploaded";
  }
  return "unknown";
}

enum class LifecycleEventKind {
  StartProcessing,
  ProcessingDone,
  StartUpload,
  UploadDone,
};

inline const char* to_string(LifecycleEventKind kind) {
  switch (kind) {
    case LifecycleEventKind::StartProcessing: return "start_processing";
    case LifecycleEventKind::ProcessingDone: return "processing_done";
    case LifecycleEventKind::StartUpload: return "start_upload";
    case LifecycleEventKind::UploadDone: return "upload_done";
  }
  return "unknown";
}

struct LifecycleEvent {
  LifecycleEventKind kind;
  double time = 0.0;
  // ProcessingDone carries the measurement that feeds the estimator.
  std::optional<std::uint64_t> processed_size;
  std::optional<double> cpu_cost;
};

// One stream message. Sizes are bytes, times are seconds relative to the
// start of the stream. processed_size and cpu_cost are known only after
// processing completes.
struct Document {
  std::uint32_t index = 0;
  double arrival_time = 0.0;
  std::uint64_t original_size = 0;
  std::optional<std::uint64_t> processed_size;
  std::optional<double> cpu_cost;
  DocumentState state = DocumentState::QueuedUnprocessed;

  // Transition timestamps, recorded for the event trace.
  std::optional<double> proc_start_time;
  std::optional<double> proc_end_time;
  std::optional<double> upload_start_time;
  std::optional<double> upload_end_time;
};

namespace detail {
inline IllegalTransition illegal(const Document& doc, LifecycleEventKind kind) {
  return IllegalTransition("illegal transition: document " + std::to_string(doc.index) +
                           " in state " + to_string(doc.state) + " got event " +
                           to_string(kind));
}
}  // namespace detail

// Applies one life-cycle event, returning the updated document.
// Throws IllegalTransition for any edge outside the life-cycle graph.
inline Document transition(Document doc, const LifecycleEvent& event) {
  switch (event.kind) {
    case LifecycleEventKind::StartProcessing:
      if (doc.state != DocumentState::QueuedUnprocessed) throw detail::illegal(doc, event.kind);
      doc.state = DocumentState::Processing;
      doc.proc_start_time = event.time;
      return doc;
    case LifecycleEventKind::ProcessingDone:
      if (doc.state != DocumentState::Processing) throw detail::illegal(doc, event.kind);
      if (!event.processed_size || !event.cpu_cost) {
        throw IllegalTransition("processing_done without measured size/cost for document " +
                                std::to_string(doc.index));
      }
      if (*event.processed_size == 0 || *event.processed_size > doc.original_size) {
        throw IllegalTransition("measured processed size out of (0, original] for document " +
                                std::to_string(doc.index));
      }
      if (*event.cpu_cost <= 0.0) {
        throw IllegalTransition("non-positive cpu cost for document " + std::to_string(doc.index));
      }
      doc.state = DocumentState::QueuedProcessed;
      doc.proc_end_time = event.time;
      doc.processed_size = event.processed_size;
      doc.cpu_cost = event.cpu_cost;
      return doc;
    case LifecycleEventKind::StartUpload:
      if (doc.state != DocumentState::QueuedUnprocessed &&
          doc.state != DocumentState::QueuedProcessed) {
        throw detail::illegal(doc, event.kind);
      }
      doc.state = DocumentState::Uploading;
      doc.upload_start_time = event.time;
      return doc;
    case LifecycleEventKind::UploadDone:
      if (doc.state != DocumentState::Uploading) throw detail::illegal(doc, event.kind);
      doc.state = DocumentState::Uploaded;
      doc.upload_end_time = event.time;
      return doc;
  }
  throw detail::illegal(doc, event.kind);
}

// Bytes saved by the operator per CPU second spent on this document.
struct NormalizedReduction {
  double bytes_per_cpu_second = 0.0;
};

inline NormalizedReduction normalized_reduction(const Document& doc) {
  if (!doc.processed_size || !doc.cpu_cost) {
    throw NotYetProcessed("document " + std::to_string(doc.index) + " has not been processed");
  }
  double saved = static_cast<double>(doc.original_size - *doc.processed_size);
  return NormalizedReduction{saved / *doc.cpu_cost};
}

}  // namespace edgestream
