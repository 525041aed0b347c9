#pragma once

// Fluid processor-sharing model of a capped upload channel: at most
// max_concurrent transfers, each draining at an equal share of the total
// capacity. Work conserving: with at least one active transfer the total
// drain rate equals the capacity exactly.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace edgestream {

struct LinkFull : std::logic_error {
  using std::logic_error::logic_error;
};

struct NegativeInterval : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr double mbps_to_bytes_per_sec(double mbps) { return mbps * 125000.0; }

class SharedLink {
 public:
  struct Transfer {
    std::uint32_t doc_index;
    double remaining_bytes;
    double admit_time;
  };

  SharedLink(double capacity_bytes_per_sec, std::size_t max_concurrent)
      : capacity_(capacity_bytes_per_sec), max_concurrent_(max_concurrent) {
    if (capacity_ <= 0.0) throw std::invalid_argument("link capacity must be > 0");
    if (max_concurrent_ == 0) throw std::invalid_argument("max concurrent uploads must be >= 1");
  }

  // Adds a transfer. The caller must respect the concurrency bound; hitting
  // LinkFull means a scheduler bug.
  void admit(std::uint32_t doc_index, std::uint64_t size_bytes, double now) {
    if (active_.size() >= max_concurrent_) {
      throw LinkFull("admit beyond max_concurrent=" + std::to_string(max_concurrent_));
    }
    if (size_bytes == 0) throw std::invalid_argument("transfer size must be > 0");
    active_.push_back(Transfer{doc_index, static_cast<double>(size_bytes), now});
  }

  // Earliest projected completion under the current equal-share rates,
  // assuming no membership change before it. Ties break to the lowest
  // document index.
  std::optional<std::pair<std::uint32_t, double>> next_completion(double now) const {
    if (active_.empty()) return std::nullopt;
    double per_transfer_rate = capacity_ / static_cast<double>(active_.size());
    std::optional<std::pair<std::uint32_t, double>> best;
    for (const Transfer& t : active_) {
      double finish = now + t.remaining_bytes / per_transfer_rate;
      if (!best || finish < best->second ||
          (finish == best->second && t.doc_index < best->first)) {
        best = {t.doc_index, finish};
      }
    }
    return best;
  }

  // Drains every active transfer by (to - from) * capacity / |active| and
  // removes the ones that reach zero, returning their indices in ascending
  // order. The caller guarantees no completion falls strictly inside
  // (from, to); completions exactly at `to` are reported here.
  std::vector<std::uint32_t> advance(double from, double to) {
    if (to < from) throw NegativeInterval("advance interval is negative");
    std::vector<std::uint32_t> completed;
    if (active_.empty() || to == from) return completed;
    double drained = (to - from) * capacity_ / static_cast<double>(active_.size());
    for (Transfer& t : active_) t.remaining_bytes -= drained;
    for (const Transfer& t : active_) {
      if (t.remaining_bytes <= kCompletionSlackBytes) completed.push_back(t.doc_index);
    }
    std::erase_if(active_, [](const Transfer& t) {
      return t.remaining_bytes <= kCompletionSlackBytes;
    });
    std::sort(completed.begin(), completed.end());
    return completed;
  }

  std::size_t active_count() const { return active_.size(); }
  std::size_t max_concurrent() const { return max_concurrent_; }
  double capacity() const { return capacity_; }
  bool idle() const { return active_.empty(); }
  const std::vector<Transfer>& active() const { return active_; }

 private:
  // Absorbs accumulated floating-point drift; one microbyte is far below
  // any observable completion-time difference.
  static constexpr double kCompletionSlackBytes = 1e-6;

  double capacity_;
  std::size_t max_concurrent_;
  std::vector<Transfer> active_;
};

}  // namespace edgestream
