#include "edgestream/ratio_spline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

using namespace edgestream;

namespace {

// Independent reference: linear scan over the sorted knot list, straight
// line between the bracketing knots, clamped outside the range.
double oracle_estimate(const std::vector<RatioSpline::Knot>& knots, double prior,
                       std::uint32_t index) {
  if (knots.empty()) return prior;
  if (index <= knots.front().index) return knots.front().ratio;
  if (index >= knots.back().index) return knots.back().ratio;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i].index <= index && index <= knots[i + 1].index) {
      double span = static_cast<double>(knots[i + 1].index) - knots[i].index;
      double t = (static_cast<double>(index) - knots[i].index) / span;
      return knots[i].ratio + t * (knots[i + 1].ratio - knots[i].ratio);
    }
  }
  return prior;  // unreachable
}

RatioSpline make_spline(std::initializer_list<RatioSpline::Knot> knots) {
  RatioSpline spline;
  for (const auto& k : knots) spline.observe(k.index, k.ratio);
  return spline;
}

TEST(Observe, FirstInsertion) {
  RatioSpline spline;
  spline.observe(10, 500.0);
  ASSERT_EQ(spline.knots().size(), 1u);
  EXPECT_EQ(spline.knots()[0].index, 10u);
  EXPECT_EQ(spline.knots()[0].ratio, 500.0);
}

TEST(Observe, DuplicateIndexReplaces) {
  RatioSpline spline = make_spline({{10, 500.0}});
  spline.observe(10, 700.0);
  ASSERT_EQ(spline.knots().size(), 1u);
  EXPECT_EQ(spline.knots()[0].ratio, 700.0);
}

TEST(Observe, KeepsIndicesStrictlyIncreasing) {
  RatioSpline spline = make_spline({{10, 500.0}});
  spline.observe(5, 200.0);
  ASSERT_EQ(spline.knots().size(), 2u);
  EXPECT_EQ(spline.knots()[0].index, 5u);
  EXPECT_EQ(spline.knots()[1].index, 10u);
}

TEST(Observe, RejectsNegativeRatio) {
  RatioSpline spline;
  EXPECT_THROW(spline.observe(3, -1.0), NegativeRatio);
}

TEST(Estimate, LinearMidpoint) {
  RatioSpline spline = make_spline({{0, 100.0}, {10, 200.0}});
  EXPECT_DOUBLE_EQ(spline.estimate(5), 150.0);
}

TEST(Estimate, ClampsBeyondOutermostKnots) {
  RatioSpline spline = make_spline({{0, 100.0}, {10, 200.0}});
  EXPECT_DOUBLE_EQ(spline.estimate(25), 200.0);
}

TEST(Estimate, InteriorSegment) {
  // Oracle-checked: on segment (4,300)-(20,100), index 12 sits at t=0.5.
  RatioSpline spline = make_spline({{0, 100.0}, {4, 300.0}, {20, 100.0}});
  EXPECT_DOUBLE_EQ(spline.estimate(12), 200.0);
  EXPECT_DOUBLE_EQ(oracle_estimate({{0, 100.0}, {4, 300.0}, {20, 100.0}}, 0.0, 12), 200.0);
}

TEST(Estimate, DefaultPriorBeforeAnyObservation) {
  RatioSpline zero_prior;
  EXPECT_DOUBLE_EQ(zero_prior.estimate(42), 0.0);
  RatioSpline spline(123.0);
  EXPECT_DOUBLE_EQ(spline.estimate(42), 123.0);
}

TEST(Estimate, ExactAtEveryKnot) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    RatioSpline spline;
    for (int k = 0; k < 40; ++k) {
      spline.observe(static_cast<std::uint32_t>(rng() % 1000),
                     static_cast<double>(rng() % 1'000'000));
    }
    for (const auto& knot : spline.knots()) {
      EXPECT_DOUBLE_EQ(spline.estimate(knot.index), knot.ratio);
    }
  }
}

TEST(Estimate, MatchesBruteForceOracleEverywhere) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    RatioSpline spline;
    for (int k = 0; k < 30; ++k) {
      spline.observe(static_cast<std::uint32_t>(rng() % 500),
                     static_cast<double>(rng() % 1'000'000) / 7.0);
    }
    for (std::uint32_t i = 0; i < 600; ++i) {
      EXPECT_NEAR(spline.estimate(i), oracle_estimate(spline.knots(), 0.0, i), 1e-9);
    }
  }
}

TEST(Estimate, SegmentsMonotoneAndBounded) {
  std::mt19937_64 rng(13);
  RatioSpline spline;
  for (int k = 0; k < 25; ++k) {
    spline.observe(static_cast<std::uint32_t>(rng() % 400),
                   static_cast<double>(rng() % 100'000));
  }
  const auto& knots = spline.knots();
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    double lo = std::min(knots[s].ratio, knots[s + 1].ratio);
    double hi = std::max(knots[s].ratio, knots[s + 1].ratio);
    double previous = knots[s].ratio;
    bool rising = knots[s + 1].ratio >= knots[s].ratio;
    for (std::uint32_t i = knots[s].index; i <= knots[s + 1].index; ++i) {
      double e = spline.estimate(i);
      EXPECT_GE(e, lo - 1e-9);
      EXPECT_LE(e, hi + 1e-9);
      if (rising) {
        EXPECT_GE(e, previous - 1e-9);
      } else {
        EXPECT_LE(e, previous + 1e-9);
      }
      previous = e;
    }
  }
}

TEST(Estimate, InsertionOrderDoesNotMatter) {
  std::mt19937_64 rng(14);
  std::vector<RatioSpline::Knot> observations;
  for (int k = 0; k < 30; ++k) {
    observations.push_back({static_cast<std::uint32_t>(k * 7 + (rng() % 5)),
                            static_cast<double>(rng() % 50'000)});
  }
  RatioSpline in_order;
  for (const auto& o : observations) in_order.observe(o.index, o.ratio);
  for (int shuffle = 0; shuffle < 10; ++shuffle) {
    std::shuffle(observations.begin(), observations.end(), rng);
    RatioSpline shuffled;
    for (const auto& o : observations) shuffled.observe(o.index, o.ratio);
    for (std::uint32_t i = 0; i < 250; ++i) {
      EXPECT_DOUBLE_EQ(shuffled.estimate(i), in_order.estimate(i));
    }
  }
}

TEST(SearchTarget, MidpointOfOnlyGap) {
  RatioSpline spline = make_spline({{0, 1.0}, {10, 1.0}});
  std::vector<std::uint32_t> candidates{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(spline.search_target(candidates), 5u);
}

TEST(SearchTarget, LargestGapMidpoint) {
  RatioSpline spline = make_spline({{0, 1.0}, {4, 1.0}, {20, 1.0}});
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t i = 0; i <= 20; ++i) candidates.push_back(i);
  EXPECT_EQ(spline.search_target(candidates), 12u);
}

TEST(SearchTarget, NoKnotsPicksLowestCandidate) {
  RatioSpline spline;
  std::vector<std::uint32_t> candidates{7, 3, 9};
  EXPECT_EQ(spline.search_target(candidates), 3u);
}

TEST(SearchTarget, EmptyCandidates) {
  RatioSpline spline = make_spline({{0, 1.0}});
  EXPECT_EQ(spline.search_target({}), std::nullopt);
}

TEST(SearchTarget, OutputMaximizesDistanceToNearestKnot) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    RatioSpline spline;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 10); ++k) {
      spline.observe(static_cast<std::uint32_t>(rng() % 300), 1.0);
    }
    std::vector<std::uint32_t> candidates;
    for (int c = 0; c < 1 + static_cast<int>(rng() % 30); ++c) {
      candidates.push_back(static_cast<std::uint32_t>(rng() % 300));
    }
    auto target = spline.search_target(candidates);
    ASSERT_TRUE(target.has_value());
    EXPECT_NE(std::find(candidates.begin(), candidates.end(), *target), candidates.end());
    for (std::uint32_t candidate : candidates) {
      EXPECT_GE(spline.distance_to_nearest_knot(*target),
                spline.distance_to_nearest_knot(candidate));
    }
  }
}

}  // namespace
