#pragma once

// Online piecewise-linear estimate of CPU-normalized message size reduction
// as a function of document index. Each finished document contributes one
// knot; queries interpolate linearly between the bracketing knots and clamp
// to the nearest knot outside the observed range.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace edgestream {

struct NegativeRatio : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class RatioSpline {
 public:
  struct Knot {
    std::uint32_t index;
    double ratio;  // bytes per CPU second
  };

  RatioSpline() = default;
  explicit RatioSpline(double default_prior) : default_prior_(default_prior) {}

  // Inserts (or replaces) the knot at `index`. Ratios are byte counts per
  // CPU second and can never be negative.
  void observe(std::uint32_t index, double ratio) {
    if (ratio < 0.0) throw NegativeRatio("negative reduction ratio observed");
    auto it = lower_bound(index);
    if (it != knots_.end() && it->index == index) {
      it->ratio = ratio;  // latest measurement wins
    } else {
      knots_.insert(it, Knot{index, ratio});
    }
  }

  // Linear interpolation between the bracketing knots; clamped to the
  // nearest knot value beyond the outermost knots; default prior when no
  // knot exists yet. Exact at knot indices.
  double estimate(std::uint32_t index) const {
    if (knots_.empty()) return default_prior_;
    auto it = lower_bound(index);
    if (it != knots_.end() && it->index == index) return it->ratio;
    if (it == knots_.begin()) return knots_.front().ratio;
    if (it == knots_.end()) return knots_.back().ratio;
    const Knot& lo = *(it - 1);
    const Knot& hi = *it;
    double t = (static_cast<double>(index) - lo.index) /
               (static_cast<double>(hi.index) - lo.index);
    return lo.ratio + t * (hi.ratio - lo.ratio);
  }

  // Picks the candidate farthest from any knot: the least-explored region
  // of the stream. Ties break to the lowest index; with no knots the lowest
  // candidate index is the least-explored point.
  std::optional<std::uint32_t> search_target(std::span<const std::uint32_t> candidates) const {
    if (candidates.empty()) return std::nullopt;
    if (knots_.empty()) return *std::min_element(candidates.begin(), candidates.end());
    std::optional<std::uint32_t> best;
    std::uint64_t best_distance = 0;
    for (std::uint32_t candidate : candidates) {
      std::uint64_t d = distance_to_nearest_knot(candidate);
      if (!best || d > best_distance || (d == best_distance && candidate < *best)) {
        best = candidate;
        best_distance = d;
      }
    }
    return best;
  }

  std::uint64_t distance_to_nearest_knot(std::uint32_t index) const {
    auto it = lower_bound(index);
    std::uint64_t d = UINT64_MAX;
    if (it != knots_.end()) d = std::min(d, static_cast<std::uint64_t>(it->index) - index);
    if (it != knots_.begin()) {
      d = std::min(d, static_cast<std::uint64_t>(index) - (it - 1)->index);
    }
    return d;
  }

  const std::vector<Knot>& knots() const { return knots_; }
  double default_prior() const { return default_prior_; }
  bool empty() const { return knots_.empty(); }

 private:
  std::vector<Knot>::iterator lower_bound(std::uint32_t index) {
    return std::lower_bound(knots_.begin(), knots_.end(), index,
                            [](const Knot& k, std::uint32_t i) { return k.index < i; });
  }
  std::vector<Knot>::const_iterator lower_bound(std::uint32_t index) const {
    return std::lower_bound(knots_.begin(), knots_.end(), index,
                            [](const Knot& k, std::uint32_t i) { return k.index < i; });
  }

  std::vector<Knot> knots_;  // strictly increasing in index
  double default_prior_ = 0.0;
};

}  // namespace edgestream
