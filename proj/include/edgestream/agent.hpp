#pragma once

// Real-mode edge agent: watches a directory for images, runs M operator
// workers and N upload workers against one prioritized queue, and streams
// documents to the gateway. Scheduling state (queue, spline, decision
// counter, trace) forms a single critical region under one mutex; operator
// execution and network transmission happen outside it. Workers sleep on a
// condition variable and are woken on every queue change.
//
// The emitted trace records the observable document lifecycle and passes the
// same validators as simulator traces. A failed processing attempt is not an
// observable lifecycle step — the document silently returns to the
// unprocessed queue (flagged to skip further processing) and the failure
// goes to the log, with the claim's trace entry removed.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "edgestream/core.hpp"
#include "edgestream/image_operator.hpp"
#include "edgestream/policy.hpp"
#include "edgestream/ratio_spline.hpp"
#include "edgestream/rng.hpp"
#include "edgestream/trace.hpp"

namespace edgestream {

struct AgentConfig {
  std::filesystem::path watch_dir;
  std::string gateway_url;  // e.g. http://127.0.0.1:8080
  std::string stream_id = "default";
  std::size_t num_process_workers = 1;  // M; 0 only with NoProcessing
  std::size_t num_upload_workers = 4;   // N
  ProcessPolicy process_policy = ProcessPolicy::spline_priority();
  UploadPolicy upload_policy = UploadPolicy::inverse_priority();
  double poll_interval = 0.25;  // seconds between directory scans
  std::uint8_t threshold = 30;
  Connectivity connectivity = Connectivity::Four;
  std::uint64_t seed = 0;
  // Stop once this many documents are uploaded; unset = run until stop().
  std::optional<std::size_t> expected_documents;
  // Operator outputs; defaults to a dot-directory beside the watched files
  // (subdirectories are never scanned, so outputs are not re-ingested).
  std::filesystem::path processed_dir;
  std::size_t upload_attempts = 3;
  double retry_backoff = 1.0;  // seconds; doubles per attempt

  void validate() const {
    if (watch_dir.empty()) throw std::invalid_argument("watch_dir must be set");
    if (gateway_url.empty()) throw std::invalid_argument("gateway_url must be set");
    if (stream_id.empty()) throw std::invalid_argument("stream_id must be set");
    if (num_upload_workers == 0) throw std::invalid_argument("need at least one upload worker");
    if (num_process_workers == 0 && process_policy.kind != ProcessPolicy::Kind::NoProcessing) {
      throw std::invalid_argument("num_process_workers must be >= 1 unless policy is none");
    }
    if (poll_interval <= 0.0) throw std::invalid_argument("poll_interval must be > 0");
    if (upload_attempts == 0) throw std::invalid_argument("upload_attempts must be >= 1");
    if (retry_backoff < 0.0) throw std::invalid_argument("retry_backoff must be >= 0");
  }
};

struct AgentResult {
  bool ok = false;
  std::string error;
  std::size_t documents_uploaded = 0;
  std::size_t documents_processed = 0;
  std::vector<TraceEvent> trace;
  RatioSpline final_spline;
};

namespace detail {

// Stream index from the last digit run in the stem: "frame_0123.png" -> 123.
inline std::optional<std::uint32_t> index_from_name(const std::string& stem) {
  std::size_t end = stem.find_last_of("0123456789");
  if (end == std::string::npos) return std::nullopt;
  std::size_t begin = end + 1;
  while (begin > 0 && stem[begin - 1] >= '0' && stem[begin - 1] <= '9') --begin;
  try {
    unsigned long value = std::stoul(stem.substr(begin, end + 1 - begin));
    if (value > 0xffffffffUL) return std::nullopt;
    return static_cast<std::uint32_t>(value);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

class Agent {
 public:
  explicit Agent(AgentConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.processed_dir.empty()) {
      config_.processed_dir = config_.watch_dir / ".processed";
    }
  }

  // Blocks until expected_documents are uploaded, stop() is called, or a
  // fatal error occurs. Reusable only once per Agent instance.
  AgentResult run() {
    start_time_ = std::chrono::steady_clock::now();
    std::filesystem::create_directories(config_.processed_dir);

    std::vector<std::thread> workers;
    workers.emplace_back([this] { intake_loop(); });
    if (config_.process_policy.kind != ProcessPolicy::Kind::NoProcessing) {
      for (std::size_t w = 0; w < config_.num_process_workers; ++w) {
        workers.emplace_back([this] { process_loop(); });
      }
    }
    for (std::size_t w = 0; w < config_.num_upload_workers; ++w) {
      workers.emplace_back([this] { upload_loop(); });
    }

    {
      std::unique_lock lock(mutex_);
      done_cv_.wait(lock, [this] {
        return stop_requested_ || !error_.empty() ||
               (config_.expected_documents && uploaded_count_ >= *config_.expected_documents);
      });
      stop_requested_ = true;
    }
    queue_cv_.notify_all();
    for (std::thread& w : workers) w.join();

    AgentResult result;
    std::lock_guard lock(mutex_);
    result.error = error_;
    result.ok = error_.empty();
    result.documents_uploaded = uploaded_count_;
    result.documents_processed = processed_count_;
    result.trace = trace_;
    result.final_spline = spline_;
    return result;
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stop_requested_ = true;
    }
    queue_cv_.notify_all();
    done_cv_.notify_all();
  }

 private:
  struct AgentDoc {
    Document doc;
    std::filesystem::path path;
    std::filesystem::path processed_path;
    std::string original_name;
    bool skip_processing = false;
    bool processed = false;
  };

  double now_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time_).count();
  }

  // --- intake -------------------------------------------------------------

  struct PendingFile {
    std::uintmax_t size = 0;
    std::filesystem::file_time_type mtime;
  };

  void intake_loop() {
    std::map<std::filesystem::path, PendingFile> last_seen;
    std::set<std::filesystem::path> ingested;
    bool first_batch = true;

    while (!should_stop()) {
      std::vector<std::filesystem::path> stable;
      std::error_code ec;
      std::filesystem::directory_iterator it(config_.watch_dir, ec);
      if (ec) {
        fail("watch directory unreadable: " + config_.watch_dir.string());
        return;
      }
      for (const auto& entry : it) {
        if (!entry.is_regular_file(ec) || ec) continue;
        const std::filesystem::path& path = entry.path();
        if (path.filename().string().front() == '.') continue;
        if (ingested.count(path)) continue;
        PendingFile current;
        current.size = entry.file_size(ec);
        if (ec) continue;  // vanished between scan and stat
        current.mtime = entry.last_write_time(ec);
        if (ec) continue;
        auto seen = last_seen.find(path);
        if (seen != last_seen.end() && seen->second.size == current.size &&
            seen->second.mtime == current.mtime) {
          stable.push_back(path);
        } else {
          last_seen[path] = current;
        }
      }

      // Files present at startup enter in index order; later ones in the
      // order their writes settle.
      if (first_batch && !stable.empty()) {
        std::sort(stable.begin(), stable.end(), [this](const auto& a, const auto& b) {
          return assigned_or_name_index(a) < assigned_or_name_index(b);
        });
        first_batch = false;
      }
      for (const std::filesystem::path& path : stable) {
        ingested.insert(path);
        last_seen.erase(path);
        enqueue_file(path);
      }

      std::unique_lock lock(mutex_);
      queue_cv_.wait_for(lock, std::chrono::duration<double>(config_.poll_interval),
                         [this] { return stop_requested_; });
      if (stop_requested_) return;
    }
  }

  std::pair<std::uint32_t, std::string> assigned_or_name_index(
      const std::filesystem::path& path) const {
    auto parsed = detail::index_from_name(path.stem().string());
    return {parsed.value_or(0xffffffffu), path.filename().string()};
  }

  void enqueue_file(const std::filesystem::path& path) {
    std::error_code ec;
    std::uintmax_t size = std::filesystem::file_size(path, ec);
    if (ec || size == 0) {
      std::fprintf(stderr, "agent: skipping unreadable or empty file %s\n",
                   path.filename().string().c_str());
      return;
    }

    std::lock_guard lock(mutex_);
    std::uint32_t index;
    auto parsed = detail::index_from_name(path.stem().string());
    if (parsed && !docs_.count(*parsed)) {
      index = *parsed;
    } else {
      index = next_fallback_index();
      if (parsed) {
        std::fprintf(stderr, "agent: index %u already taken, %s gets %u\n", *parsed,
                     path.filename().string().c_str(), index);
      }
    }

    AgentDoc d;
    d.doc.index = index;
    d.doc.arrival_time = now_seconds();
    d.doc.original_size = size;
    d.path = path;
    d.original_name = path.filename().string();
    trace_.push_back({d.doc.arrival_time, index, TraceKind::Arrive, static_cast<double>(size)});
    docs_.emplace(index, std::move(d));
    queue_cv_.notify_all();
  }

  std::uint32_t next_fallback_index() const {
    std::uint32_t index = docs_.empty() ? 0 : docs_.rbegin()->first + 1;
    while (docs_.count(index)) ++index;
    return index;
  }

  // --- processing ---------------------------------------------------------

  void process_loop() {
    Rng rng(mix_seed(config_.seed, 1));
    while (true) {
      std::uint32_t index;
      std::filesystem::path in_path, out_path;
      {
        std::unique_lock lock(mutex_);
        queue_cv_.wait(lock, [this] { return stop_requested_ || claimable_for_processing(); });
        if (stop_requested_) return;

        auto snapshot = processing_snapshot();
        auto choice =
            next_to_process(config_.process_policy, snapshot, spline_, decision_counter_, rng);
        if (!choice) continue;  // raced with another worker
        ++decision_counter_;
        AgentDoc& d = docs_.at(choice->index);
        d.doc = transition(d.doc, {LifecycleEventKind::StartProcessing, now_seconds()});
        trace_.push_back({*d.doc.proc_start_time, choice->index,
                          choice->kind == SelectionKind::Search ? TraceKind::ProcStartSearch
                                                                : TraceKind::ProcStartPrio,
                          spline_.estimate(choice->index)});
        index = choice->index;
        in_path = d.path;
        out_path = config_.processed_dir / d.original_name;
      }

      std::optional<OperatorReport> report;
      std::string failure;
      try {
        report = process_file(in_path, out_path, config_.threshold, config_.connectivity);
      } catch (const std::exception& e) {
        failure = e.what();
      }

      std::lock_guard lock(mutex_);
      AgentDoc& d = docs_.at(index);
      if (report && report->processed_size < report->original_size) {
        d.doc = transition(d.doc, {LifecycleEventKind::ProcessingDone, now_seconds(),
                                   report->processed_size, report->cpu_seconds});
        d.processed = true;
        d.processed_path = out_path;
        double ratio = normalized_reduction(d.doc).bytes_per_cpu_second;
        spline_.observe(index, ratio);
        ++processed_count_;
        trace_.push_back({*d.doc.proc_end_time, index, TraceKind::ProcEnd, ratio});
      } else {
        // Operator failed or produced no byte savings: revert to the
        // unprocessed queue and upload the original. The aborted claim is
        // not an observable lifecycle step, so its trace entry goes away;
        // a genuine zero-reduction result still informs the estimator.
        if (report) {
          spline_.observe(index, 0.0);
          std::error_code ec;
          std::filesystem::remove(out_path, ec);
        } else {
          std::fprintf(stderr, "agent: operator failed on %s: %s\n",
                       d.original_name.c_str(), failure.c_str());
        }
        d.doc.state = DocumentState::QueuedUnprocessed;
        d.doc.proc_start_time.reset();
        d.skip_processing = true;
        // The doc never re-enters processing (skip flag), so its only
        // proc_start entry is this claim's; appends by other workers don't
        // disturb the identity-based lookup.
        auto claim = std::find_if(trace_.begin(), trace_.end(), [&](const TraceEvent& ev) {
          return ev.doc_index == index && (ev.kind == TraceKind::ProcStartPrio ||
                                           ev.kind == TraceKind::ProcStartSearch);
        });
        if (claim != trace_.end()) trace_.erase(claim);
      }
      queue_cv_.notify_all();
    }
  }

  bool claimable_for_processing() const {
    for (const auto& [index, d] : docs_) {
      if (d.doc.state == DocumentState::QueuedUnprocessed && !d.skip_processing) return true;
    }
    return false;
  }

  std::vector<QueuedDoc> processing_snapshot() const {
    std::vector<QueuedDoc> snapshot;
    for (const auto& [index, d] : docs_) {
      if (d.doc.state == DocumentState::QueuedUnprocessed && !d.skip_processing) {
        snapshot.push_back({index, d.doc.arrival_time, false, 0.0});
      }
    }
    return snapshot;
  }

  // --- uploading ----------------------------------------------------------

  void upload_loop() {
    Rng rng(mix_seed(config_.seed, 2));
    httplib::Client client(config_.gateway_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);

    while (true) {
      std::uint32_t index;
      std::filesystem::path payload_path;
      std::string original_name;
      std::uint64_t original_size;
      bool processed;
      {
        std::unique_lock lock(mutex_);
        queue_cv_.wait(lock, [this] { return stop_requested_ || claimable_for_upload(); });
        if (stop_requested_) return;

        auto snapshot = upload_snapshot();
        auto choice = next_to_upload(config_.upload_policy, snapshot, spline_, rng);
        if (!choice) continue;
        AgentDoc& d = docs_.at(*choice);
        d.doc = transition(d.doc, {LifecycleEventKind::StartUpload, now_seconds()});
        index = *choice;
        processed = d.processed;
        payload_path = processed ? d.processed_path : d.path;
        original_name = d.original_name;
        original_size = d.doc.original_size;
        std::error_code ec;
        std::uintmax_t bytes = std::filesystem::file_size(payload_path, ec);
        trace_.push_back({*d.doc.upload_start_time, index, TraceKind::UploadStart,
                          ec ? 0.0 : static_cast<double>(bytes)});
      }

      std::string body;
      {
        std::ifstream in(payload_path, std::ios::binary);
        body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      }

      std::string target = "/v1/streams/" + config_.stream_id + "/documents/" +
                           std::to_string(index);
      httplib::Headers headers{
          {"X-Original-Name", original_name},
          {"X-Processed", processed ? "1" : "0"},
          {"X-Original-Size", std::to_string(original_size)},
      };

      bool sent = false;
      for (std::size_t attempt = 0; attempt < config_.upload_attempts && !should_stop();
           ++attempt) {
        if (attempt > 0) {
          double backoff = config_.retry_backoff * static_cast<double>(1ull << (attempt - 1));
          std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        }
        auto res = client.Post(target, headers, body, "application/octet-stream");
        if (res && res->status == 201) {
          sent = true;
          break;
        }
        std::fprintf(stderr, "agent: upload of %s attempt %zu failed (%s)\n",
                     original_name.c_str(), attempt + 1,
                     res ? std::to_string(res->status).c_str()
                         : httplib::to_string(res.error()).c_str());
      }

      std::lock_guard lock(mutex_);
      if (!sent) {
        if (stop_requested_) return;  // interrupted by shutdown, not a failure
        if (error_.empty()) {
          error_ = "upload failed after " + std::to_string(config_.upload_attempts) +
                   " attempts: " + original_name;
        }
        stop_requested_ = true;
        queue_cv_.notify_all();
        done_cv_.notify_all();
        return;
      }
      AgentDoc& d = docs_.at(index);
      d.doc = transition(d.doc, {LifecycleEventKind::UploadDone, now_seconds()});
      trace_.push_back({*d.doc.upload_end_time, index, TraceKind::UploadEnd,
                        static_cast<double>(body.size())});
      ++uploaded_count_;
      queue_cv_.notify_all();
      done_cv_.notify_all();
    }
  }

  // Upload workers drain both pools, so the link never idles while anything
  // is queued; processing workers race them for unprocessed documents,
  // mirroring the simulator's behavior at each slot vacancy.
  bool claimable_for_upload() const {
    for (const auto& [index, d] : docs_) {
      if (d.doc.state == DocumentState::QueuedProcessed ||
          d.doc.state == DocumentState::QueuedUnprocessed) {
        return true;
      }
    }
    return false;
  }

  std::vector<QueuedDoc> upload_snapshot() const {
    std::vector<QueuedDoc> snapshot;
    for (const auto& [index, d] : docs_) {
      if (d.doc.state == DocumentState::QueuedProcessed) {
        snapshot.push_back({index, d.doc.arrival_time, true, *d.doc.proc_end_time});
      } else if (d.doc.state == DocumentState::QueuedUnprocessed) {
        snapshot.push_back({index, d.doc.arrival_time, false, 0.0});
      }
    }
    return snapshot;
  }

  // --- shared state -------------------------------------------------------

  bool should_stop() {
    std::lock_guard lock(mutex_);
    return stop_requested_;
  }

  void fail(const std::string& why) {
    std::lock_guard lock(mutex_);
    if (error_.empty()) error_ = why;
    stop_requested_ = true;
    queue_cv_.notify_all();
    done_cv_.notify_all();
  }

  AgentConfig config_;
  std::chrono::steady_clock::time_point start_time_;

  std::mutex mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable done_cv_;
  std::map<std::uint32_t, AgentDoc> docs_;
  RatioSpline spline_;
  std::uint64_t decision_counter_ = 0;
  std::vector<TraceEvent> trace_;
  std::size_t uploaded_count_ = 0;
  std::size_t processed_count_ = 0;
  bool stop_requested_ = false;
  std::string error_;
};

}  // namespace edgestream
