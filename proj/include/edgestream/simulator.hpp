#pragma once

// Deterministic discrete-event engine: document arrivals, M processing
// slots charging the workload's CPU cost, and the equal-share upload link,
// with the process/upload policies consulted at every slot vacancy.
//
// Event ordering at equal timestamps is fixed as processing completions,
// then upload completions, then deferred link admissions, then arrivals,
// each ordered by document index; slot refills happen after all events of
// a timestamp are applied. Identical (config, workload) input yields a
// byte-identical trace.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "edgestream/core.hpp"
#include "edgestream/policy.hpp"
#include "edgestream/ratio_spline.hpp"
#include "edgestream/rng.hpp"
#include "edgestream/shared_link.hpp"
#include "edgestream/trace.hpp"
#include "edgestream/workload.hpp"

namespace edgestream {

struct SimConfig {
  std::size_t num_cpu_slots = 1;           // M
  std::size_t max_concurrent_uploads = 4;  // N
  double link_capacity_mbps = 16.0;
  double upload_start_delay = 0.0;  // per-upload fixed overhead in seconds
  ProcessPolicy process_policy = ProcessPolicy::spline_priority();
  UploadPolicy upload_policy = UploadPolicy::inverse_priority();
  std::uint64_t seed = 0;
  // Offline control: sizes replaced by processed sizes before streaming,
  // no edge CPU used.
  bool offline_preprocessed = false;
  // Preloaded estimator knots, e.g. ground-truth ratios for clairvoyant
  // oracle runs or knots replayed from an earlier session.
  std::vector<RatioSpline::Knot> spline_prior;

  void validate() const {
    if (num_cpu_slots == 0 && process_policy.kind != ProcessPolicy::Kind::NoProcessing) {
      throw std::invalid_argument("num_cpu_slots must be >= 1 unless process policy is none");
    }
    if (max_concurrent_uploads == 0) {
      throw std::invalid_argument("max_concurrent_uploads must be >= 1");
    }
    if (link_capacity_mbps <= 0.0) throw std::invalid_argument("link capacity must be > 0");
    if (upload_start_delay < 0.0) throw std::invalid_argument("upload delay must be >= 0");
    if (offline_preprocessed && process_policy.kind != ProcessPolicy::Kind::NoProcessing) {
      throw std::invalid_argument("offline_preprocessed requires process policy none");
    }
  }
};

struct RunMetrics {
  double end_to_end_latency = 0.0;  // first arrival -> last upload completion
  std::uint64_t bytes_uploaded_total = 0;
  std::uint64_t bytes_saved_total = 0;
  std::size_t docs_processed_at_edge = 0;
  std::vector<double> per_doc_latency;  // indexed by document index
};

struct RunResult {
  RunMetrics metrics;
  std::vector<TraceEvent> trace;
  RatioSpline final_spline;
};

struct LatencySummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

namespace detail {

inline double median_of(const std::vector<double>& sorted, std::size_t lo, std::size_t hi) {
  std::size_t n = hi - lo;
  std::size_t mid = lo + n / 2;
  if (n % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace detail

// Five-number summary; quartiles are medians of the lower/upper halves
// (middle element excluded for odd counts).
inline LatencySummary summarize_latencies(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("no latencies to summarize");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  LatencySummary s;
  s.min = values.front();
  s.max = values.back();
  s.median = detail::median_of(values, 0, n);
  if (n == 1) {
    s.q1 = s.q3 = values[0];
  } else {
    s.q1 = detail::median_of(values, 0, n / 2);
    s.q3 = detail::median_of(values, (n + 1) / 2, n);
  }
  return s;
}

namespace detail {

struct SimDoc {
  Document doc;
  // Ground truth from the workload, revealed to the scheduler only when
  // processing completes.
  std::uint64_t true_processed_size = 0;
  double true_cpu_cost = 0.0;
  std::uint64_t uploaded_bytes = 0;
};

struct RunningProc {
  double end_time;
  std::uint32_t doc_index;
};

struct PendingAdmit {
  double admit_time;
  std::uint32_t doc_index;
  std::uint64_t size;
};

}  // namespace detail

inline RunResult run(const SimConfig& config, const Workload& workload) {
  config.validate();
  workload.validate();
  if (workload.docs.empty()) throw std::invalid_argument("workload is empty");

  const std::size_t n = workload.docs.size();
  std::vector<detail::SimDoc> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const WorkloadDoc& w = workload.docs[i];
    detail::SimDoc& d = docs[i];
    d.doc.index = w.index;
    d.doc.arrival_time = w.arrival_time;
    d.doc.original_size = config.offline_preprocessed ? w.processed_size : w.original_size;
    d.true_processed_size = w.processed_size;
    d.true_cpu_cost = w.cpu_cost;
  }

  SharedLink link(mbps_to_bytes_per_sec(config.link_capacity_mbps),
                  config.max_concurrent_uploads);
  RatioSpline spline;
  for (const RatioSpline::Knot& k : config.spline_prior) spline.observe(k.index, k.ratio);

  Rng process_rng(mix_seed(config.seed, 1));
  Rng upload_rng(mix_seed(config.seed, 2));

  std::vector<TraceEvent> trace;
  trace.reserve(n * 6);
  std::vector<detail::RunningProc> running;
  std::vector<detail::PendingAdmit> pending_admits;
  std::uint64_t decision_counter = 0;
  std::size_t next_arrival = 0;
  std::size_t uploaded_count = 0;
  std::size_t processed_count = 0;
  double now = 0.0;

  constexpr double kNever = std::numeric_limits<double>::infinity();

  auto queued_snapshot = [&](bool unprocessed_only) {
    std::vector<QueuedDoc> snapshot;
    // Documents are indexed in arrival order, so the first next_arrival
    // entries are exactly the ones that have arrived.
    for (std::size_t i = 0; i < next_arrival; ++i) {
      const detail::SimDoc& d = docs[i];
      if (d.doc.state == DocumentState::QueuedUnprocessed) {
        snapshot.push_back({d.doc.index, d.doc.arrival_time, false, 0.0});
      } else if (!unprocessed_only && d.doc.state == DocumentState::QueuedProcessed) {
        snapshot.push_back({d.doc.index, d.doc.arrival_time, true, *d.doc.proc_end_time});
      }
    }
    return snapshot;  // built in index order
  };

  auto refill_cpu_slots = [&] {
    if (config.process_policy.kind == ProcessPolicy::Kind::NoProcessing) return;
    while (running.size() < config.num_cpu_slots) {
      auto snapshot = queued_snapshot(true);
      auto choice =
          next_to_process(config.process_policy, snapshot, spline, decision_counter, process_rng);
      if (!choice) break;
      ++decision_counter;
      detail::SimDoc& d = docs[choice->index];
      d.doc = transition(d.doc, {LifecycleEventKind::StartProcessing, now});
      running.push_back({now + d.true_cpu_cost, choice->index});
      trace.push_back({now, choice->index,
                       choice->kind == SelectionKind::Search ? TraceKind::ProcStartSearch
                                                             : TraceKind::ProcStartPrio,
                       spline.estimate(choice->index)});
    }
  };

  auto refill_upload_slots = [&] {
    while (link.active_count() + pending_admits.size() < config.max_concurrent_uploads) {
      auto snapshot = queued_snapshot(false);
      auto index = next_to_upload(config.upload_policy, snapshot, spline, upload_rng);
      if (!index) break;
      detail::SimDoc& d = docs[*index];
      std::uint64_t size = d.doc.state == DocumentState::QueuedProcessed ? *d.doc.processed_size
                                                                         : d.doc.original_size;
      d.doc = transition(d.doc, {LifecycleEventKind::StartUpload, now});
      d.uploaded_bytes = size;
      trace.push_back({now, *index, TraceKind::UploadStart, static_cast<double>(size)});
      if (config.upload_start_delay == 0.0) {
        link.admit(*index, size, now);
      } else {
        pending_admits.push_back({now + config.upload_start_delay, *index, size});
      }
    }
  };

  while (uploaded_count < n) {
    double t_proc = kNever;
    for (const detail::RunningProc& r : running) t_proc = std::min(t_proc, r.end_time);
    double t_link = kNever;
    if (auto completion = link.next_completion(now)) t_link = completion->second;
    double t_admit = kNever;
    for (const detail::PendingAdmit& p : pending_admits) t_admit = std::min(t_admit, p.admit_time);
    double t_arrival = next_arrival < n ? docs[next_arrival].doc.arrival_time : kNever;

    double t = std::min(std::min(t_proc, t_link), std::min(t_admit, t_arrival));
    if (t == kNever) {
      throw std::logic_error("simulation stalled with documents not uploaded");
    }

    // Processing completions first.
    std::vector<std::uint32_t> done;
    for (const detail::RunningProc& r : running) {
      if (r.end_time == t) done.push_back(r.doc_index);
    }
    std::sort(done.begin(), done.end());
    std::erase_if(running, [&](const detail::RunningProc& r) { return r.end_time == t; });
    for (std::uint32_t index : done) {
      detail::SimDoc& d = docs[index];
      d.doc = transition(d.doc, {LifecycleEventKind::ProcessingDone, t, d.true_processed_size,
                                 d.true_cpu_cost});
      double ratio = normalized_reduction(d.doc).bytes_per_cpu_second;
      spline.observe(index, ratio);
      ++processed_count;
      trace.push_back({t, index, TraceKind::ProcEnd, ratio});
    }

    // Then upload completions.
    for (std::uint32_t index : link.advance(now, t)) {
      detail::SimDoc& d = docs[index];
      d.doc = transition(d.doc, {LifecycleEventKind::UploadDone, t});
      ++uploaded_count;
      trace.push_back({t, index, TraceKind::UploadEnd, static_cast<double>(d.uploaded_bytes)});
    }

    // Deferred admissions reaching their start time.
    std::vector<detail::PendingAdmit> due;
    for (const detail::PendingAdmit& p : pending_admits) {
      if (p.admit_time == t) due.push_back(p);
    }
    std::sort(due.begin(), due.end(), [](const detail::PendingAdmit& a,
                                         const detail::PendingAdmit& b) {
      return a.doc_index < b.doc_index;
    });
    std::erase_if(pending_admits,
                  [&](const detail::PendingAdmit& p) { return p.admit_time == t; });
    for (const detail::PendingAdmit& p : due) link.admit(p.doc_index, p.size, t);

    // Arrivals last.
    while (next_arrival < n && docs[next_arrival].doc.arrival_time == t) {
      const detail::SimDoc& d = docs[next_arrival];
      trace.push_back({t, d.doc.index, TraceKind::Arrive,
                       static_cast<double>(d.doc.original_size)});
      ++next_arrival;
    }

    now = t;
    refill_cpu_slots();
    refill_upload_slots();
  }

  RunMetrics metrics;
  metrics.per_doc_latency.resize(n);
  double first_arrival = docs.front().doc.arrival_time;
  double last_upload_end = 0.0;
  for (const detail::SimDoc& d : docs) {
    metrics.bytes_uploaded_total += d.uploaded_bytes;
    metrics.bytes_saved_total += d.doc.original_size - d.uploaded_bytes;
    metrics.per_doc_latency[d.doc.index] = *d.doc.upload_end_time - d.doc.arrival_time;
    last_upload_end = std::max(last_upload_end, *d.doc.upload_end_time);
  }
  metrics.docs_processed_at_edge = processed_count;
  metrics.end_to_end_latency = last_upload_end - first_arrival;
  return RunResult{metrics, std::move(trace), std::move(spline)};
}

// Independent repeats of one workload; per-repeat seeds derived from
// config.seed. Returns the box-whisker summary of end-to-end latencies.
inline LatencySummary run_many(const SimConfig& config, const Workload& workload,
                               std::size_t repeats) {
  if (repeats == 0) throw std::invalid_argument("repeats must be >= 1");
  std::vector<double> latencies;
  latencies.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    SimConfig repeat_config = config;
    repeat_config.seed = mix_seed(config.seed, 0x5eedULL + r);
    latencies.push_back(run(repeat_config, workload).metrics.end_to_end_latency);
  }
  return summarize_latencies(latencies);
}

}  // namespace edgestream
