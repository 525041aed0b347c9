#pragma once

// Scheduling policies: which queued document to process next and which to
// upload next. Policies are pure decision functions over a queue snapshot;
// the caller owns the snapshot, the decision counter and the seeded
// generator, and invokes them under exclusive queue access.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgestream/ratio_spline.hpp"
#include "edgestream/rng.hpp"

namespace edgestream {

// Why a document was selected for processing. Search probes the
// least-explored stream region; everything else counts as Prio.
enum class SelectionKind { Prio, Search };

struct ProcessPolicy {
  enum class Kind { SplinePriority, RandomOrder, Fifo, NoProcessing };

  Kind kind = Kind::SplinePriority;
  std::uint32_t sampling_period = 5;  // K: every Kth decision is a search probe

  static ProcessPolicy spline_priority(std::uint32_t k = 5) {
    if (k < 1) throw std::invalid_argument("sampling period must be >= 1");
    return {Kind::SplinePriority, k};
  }
  static ProcessPolicy random_order() { return {Kind::RandomOrder, 1}; }
  static ProcessPolicy fifo() { return {Kind::Fifo, 1}; }
  static ProcessPolicy no_processing() { return {Kind::NoProcessing, 1}; }

  static ProcessPolicy parse(std::string_view name, std::uint32_t k = 5) {
    if (name == "splines") return spline_priority(k);
    if (name == "random") return random_order();
    if (name == "fifo") return fifo();
    if (name == "none") return no_processing();
    throw std::invalid_argument("unknown process policy '" + std::string(name) +
                                "' (expected splines|random|fifo|none)");
  }
  const char* name() const {
    switch (kind) {
      case Kind::SplinePriority: return "splines";
      case Kind::RandomOrder: return "random";
      case Kind::Fifo: return "fifo";
      case Kind::NoProcessing: return "none";
    }
    return "unknown";
  }
};

struct UploadPolicy {
  enum class Kind { InversePriority, Fifo, RandomOrder };

  Kind kind = Kind::InversePriority;

  static UploadPolicy inverse_priority() { return {Kind::InversePriority}; }
  static UploadPolicy fifo() { return {Kind::Fifo}; }
  static UploadPolicy random_order() { return {Kind::RandomOrder}; }

  static UploadPolicy parse(std::string_view name) {
    if (name == "inverse") return inverse_priority();
    if (name == "fifo") return fifo();
    if (name == "random") return random_order();
    throw std::invalid_argument("unknown upload policy '" + std::string(name) +
                                "' (expected inverse|fifo|random)");
  }
  const char* name() const {
    switch (kind) {
      case Kind::InversePriority: return "inverse";
      case Kind::Fifo: return "fifo";
      case Kind::RandomOrder: return "random";
    }
    return "unknown";
  }
};

// One entry of a queue snapshot. `processed` distinguishes
// Queued(processed) from Queued(unprocessed); proc_end_time is only
// meaningful for processed entries.
struct QueuedDoc {
  std::uint32_t index = 0;
  double arrival_time = 0.0;
  bool processed = false;
  double proc_end_time = 0.0;
};

struct ProcessChoice {
  std::uint32_t index;
  SelectionKind kind;
};

namespace detail {

inline std::optional<std::uint32_t> lowest_arrival(std::span<const QueuedDoc> queue) {
  std::optional<std::uint32_t> best;
  double best_arrival = 0.0;
  for (const QueuedDoc& doc : queue) {
    if (!best || doc.arrival_time < best_arrival ||
        (doc.arrival_time == best_arrival && doc.index < *best)) {
      best = doc.index;
      best_arrival = doc.arrival_time;
    }
  }
  return best;
}

}  // namespace detail

// Selects the next document to process. `queue` must contain only
// Queued(unprocessed) documents. `decision_counter` counts processing
// decisions made so far; the caller increments it per accepted choice.
// Returns nullopt when the queue is empty or the policy never processes.
inline std::optional<ProcessChoice> next_to_process(const ProcessPolicy& policy,
                                                    std::span<const QueuedDoc> queue,
                                                    const RatioSpline& spline,
                                                    std::uint64_t decision_counter,
                                                    Rng& rng) {
  if (queue.empty()) return std::nullopt;
  switch (policy.kind) {
    case ProcessPolicy::Kind::NoProcessing:
      return std::nullopt;
    case ProcessPolicy::Kind::Fifo: {
      auto idx = detail::lowest_arrival(queue);
      return ProcessChoice{*idx, SelectionKind::Prio};
    }
    case ProcessPolicy::Kind::RandomOrder:
      return ProcessChoice{queue[rng.index(queue.size())].index, SelectionKind::Prio};
    case ProcessPolicy::Kind::SplinePriority: {
      std::uint32_t k = policy.sampling_period;
      if (decision_counter % k == k - 1) {
        std::vector<std::uint32_t> candidates;
        candidates.reserve(queue.size());
        for (const QueuedDoc& doc : queue) candidates.push_back(doc.index);
        auto target = spline.search_target(candidates);
        return ProcessChoice{*target, SelectionKind::Search};
      }
      std::optional<std::uint32_t> best;
      double best_estimate = 0.0;
      for (const QueuedDoc& doc : queue) {
        double e = spline.estimate(doc.index);
        if (!best || e > best_estimate || (e == best_estimate && doc.index < *best)) {
          best = doc.index;
          best_estimate = e;
        }
      }
      return ProcessChoice{*best, SelectionKind::Prio};
    }
  }
  return std::nullopt;
}

// Selects the next document to upload. `queue` may contain both
// Queued(processed) and Queued(unprocessed) documents.
//
// InversePriority uploads processed documents first (FIFO by processing
// completion), then the unprocessed document where edge CPU would be least
// effectively applied (lowest estimated ratio).
inline std::optional<std::uint32_t> next_to_upload(const UploadPolicy& policy,
                                                   std::span<const QueuedDoc> queue,
                                                   const RatioSpline& spline, Rng& rng) {
  if (queue.empty()) return std::nullopt;
  switch (policy.kind) {
    case UploadPolicy::Kind::Fifo:
      return detail::lowest_arrival(queue);
    case UploadPolicy::Kind::RandomOrder:
      return queue[rng.index(queue.size())].index;
    case UploadPolicy::Kind::InversePriority: {
      std::optional<std::uint32_t> best_processed;
      double best_completion = 0.0;
      for (const QueuedDoc& doc : queue) {
        if (!doc.processed) continue;
        if (!best_processed || doc.proc_end_time < best_completion ||
            (doc.proc_end_time == best_completion && doc.index < *best_processed)) {
          best_processed = doc.index;
          best_completion = doc.proc_end_time;
        }
      }
      if (best_processed) return best_processed;
      std::optional<std::uint32_t> best;
      double best_estimate = 0.0;
      for (const QueuedDoc& doc : queue) {
        double e = spline.estimate(doc.index);
        if (!best || e < best_estimate || (e == best_estimate && doc.index < *best)) {
          best = doc.index;
          best_estimate = e;
        }
      }
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace edgestream
