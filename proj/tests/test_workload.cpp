#include "edgestream/workload.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

using namespace edgestream;

namespace {

TEST(Profile, SingleBumpShape) {
  ProfileSpec spec;
  spec.bumps = {{100.0, 50.0, 0.30}};
  EXPECT_DOUBLE_EQ(profile_fraction(spec, 100.0), 0.30);          // peak at the center
  EXPECT_DOUBLE_EQ(profile_fraction(spec, 49.0), 0.0);            // outside the support
  EXPECT_DOUBLE_EQ(profile_fraction(spec, 151.0), 0.0);
  EXPECT_NEAR(profile_fraction(spec, 75.0), 0.30 * 0.5, 1e-12);   // half height at half width
  EXPECT_NEAR(profile_fraction(spec, 125.0), 0.30 * 0.5, 1e-12);
}

TEST(Profile, OverlappingBumpsClampAtCap) {
  ProfileSpec spec;
  spec.bumps = {{100.0, 50.0, 0.35}, {110.0, 50.0, 0.35}};
  EXPECT_DOUBLE_EQ(profile_fraction(spec, 105.0), 0.4);
}

TEST(Profile, NeverExceedsCapAnywhere) {
  ProfileSpec spec;  // reference bumps
  for (double i = 0.0; i < 759.0; i += 0.5) {
    double f = profile_fraction(spec, i);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 0.4);
  }
}

TEST(SpecValidation, RejectsBadFields) {
  ProfileSpec spec;
  spec.n_docs = 0;
  EXPECT_THROW(spec.validate(), InvalidSpec);
  spec = ProfileSpec{};
  spec.bumps.push_back({10.0, 5.0, 0.41});
  EXPECT_THROW(spec.validate(), InvalidSpec);
  spec = ProfileSpec{};
  spec.bumps.push_back({10.0, 0.0, 0.2});
  EXPECT_THROW(spec.validate(), InvalidSpec);
  spec = ProfileSpec{};
  spec.cpu_cost.base_seconds = 0.0;
  spec.cpu_cost.seconds_per_byte = 0.0;
  EXPECT_THROW(spec.validate(), InvalidSpec);
  spec = ProfileSpec{};
  spec.size_jitter = 1.0;
  EXPECT_THROW(spec.validate(), InvalidSpec);
}

TEST(Generate, SatisfiesAllInvariants) {
  ProfileSpec spec;
  spec.seed = 7;
  Workload workload = generate(spec);
  EXPECT_EQ(workload.docs.size(), 759u);
  EXPECT_NO_THROW(workload.validate());
}

TEST(Generate, DeterministicForSeed) {
  ProfileSpec spec;
  spec.seed = 42;
  Workload a = generate(spec);
  Workload b = generate(spec);
  ASSERT_EQ(a.docs.size(), b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    EXPECT_EQ(a.docs[i].arrival_time, b.docs[i].arrival_time);
    EXPECT_EQ(a.docs[i].original_size, b.docs[i].original_size);
    EXPECT_EQ(a.docs[i].processed_size, b.docs[i].processed_size);
    EXPECT_EQ(a.docs[i].cpu_cost, b.docs[i].cpu_cost);
  }
}

TEST(Generate, SeedsProduceDifferentStreams) {
  ProfileSpec spec;
  spec.seed = 1;
  Workload a = generate(spec);
  spec.seed = 2;
  Workload b = generate(spec);
  int differing = 0;
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    if (a.docs[i].original_size != b.docs[i].original_size) ++differing;
  }
  EXPECT_GT(differing, 700);
}

TEST(Generate, ReductionTracksProfile) {
  ProfileSpec spec;
  spec.seed = 3;
  spec.noise = 0.0;
  spec.size_jitter = 0.0;
  Workload workload = generate(spec);
  for (const WorkloadDoc& d : workload.docs) {
    double fraction = profile_fraction(spec, static_cast<double>(d.index));
    double realized =
        static_cast<double>(d.original_size - d.processed_size) / static_cast<double>(d.original_size);
    EXPECT_NEAR(realized, fraction, 2.0 / static_cast<double>(d.original_size))
        << "index " << d.index;
  }
}

TEST(Generate, NeighborsReduceSimilarly) {
  // The whole point of the profile: the ratio sequence is locally correlated,
  // so adjacent documents predict each other far better than distant ones.
  ProfileSpec spec;
  spec.seed = 11;
  Workload workload = generate(spec);
  std::vector<double> ratio;
  for (const WorkloadDoc& d : workload.docs) ratio.push_back(workload.true_ratio(d.index));
  double mean = std::accumulate(ratio.begin(), ratio.end(), 0.0) / ratio.size();

  auto autocorr = [&](std::size_t lag) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + lag < ratio.size(); ++i) {
      num += (ratio[i] - mean) * (ratio[i + lag] - mean);
    }
    for (double r : ratio) den += (r - mean) * (r - mean);
    return num / den;
  };

  EXPECT_GT(autocorr(1), 0.9);
  EXPECT_GT(autocorr(1), autocorr(50) + 0.2);
}

TEST(Generate, ArrivalsSpreadAroundMeanPeriod) {
  ProfileSpec spec;
  spec.seed = 5;
  Workload workload = generate(spec);
  double last = workload.docs.back().arrival_time;
  double expected = spec.arrival.period_seconds * spec.n_docs;
  EXPECT_NEAR(last, expected, expected * 0.05);
}

TEST(TrueRatio, MatchesHandComputation) {
  Workload workload;
  workload.docs.push_back({0, 0.0, 1'000'000, 600'000, 2.0, ""});
  EXPECT_DOUBLE_EQ(workload.true_ratio(0), 200'000.0);
}

TEST(ReferenceProfile, RescalesBumpsToStreamLength) {
  ProfileSpec base;
  ProfileSpec half = reference_profile(base.n_docs / 2);
  ASSERT_EQ(half.bumps.size(), base.bumps.size());
  for (std::size_t i = 0; i < base.bumps.size(); ++i) {
    double scale = static_cast<double>(half.n_docs) / base.n_docs;
    EXPECT_NEAR(half.bumps[i].center, base.bumps[i].center * scale, 1e-9);
    EXPECT_NEAR(half.bumps[i].width, base.bumps[i].width * scale, 1e-9);
    EXPECT_DOUBLE_EQ(half.bumps[i].peak, base.bumps[i].peak);
  }
  // The same relative stream position sees the same reduction fraction.
  EXPECT_NEAR(profile_fraction(half, 0.105 * half.n_docs),
              profile_fraction(base, 0.105 * base.n_docs), 1e-6);
  EXPECT_EQ(reference_profile(base.n_docs).n_docs, base.n_docs);
  EXPECT_THROW(reference_profile(0), InvalidSpec);
  EXPECT_NO_THROW(generate(reference_profile(50)));
}

TEST(Manifest, RoundTripsThroughCsv) {
  ProfileSpec spec;
  spec.seed = 9;
  spec.n_docs = 50;
  Workload original = generate(spec);
  original.docs[3].path = "imgs/frame_0003.png";

  std::stringstream buffer;
  save_manifest(buffer, original);
  Workload restored = load_manifest(buffer);

  ASSERT_EQ(restored.docs.size(), original.docs.size());
  for (std::size_t i = 0; i < original.docs.size(); ++i) {
    EXPECT_EQ(restored.docs[i].index, original.docs[i].index);
    EXPECT_EQ(restored.docs[i].path, original.docs[i].path);
    EXPECT_EQ(restored.docs[i].original_size, original.docs[i].original_size);
    EXPECT_EQ(restored.docs[i].processed_size, original.docs[i].processed_size);
    EXPECT_EQ(restored.docs[i].cpu_cost, original.docs[i].cpu_cost);
    EXPECT_EQ(restored.docs[i].arrival_time, original.docs[i].arrival_time);
  }
}

TEST(Manifest, RoundTripsWithoutRatioColumn) {
  ProfileSpec spec;
  spec.seed = 10;
  spec.n_docs = 5;
  Workload original = generate(spec);
  std::stringstream buffer;
  save_manifest(buffer, original, /*with_ratio=*/false);
  EXPECT_EQ(load_manifest(buffer).docs.size(), 5u);
}

TEST(Manifest, RejectsBadHeader) {
  std::stringstream in("idx,path,original_size,processed_size,cpu_cost,arrival_time\n");
  EXPECT_THROW(load_manifest(in), ParseError);
}

TEST(Manifest, RejectsInvariantViolations) {
  auto attempt = [](const std::string& row) {
    std::stringstream in(std::string(kManifestHeader) + "\n" + row + "\n");
    return load_manifest(in);
  };
  EXPECT_THROW(attempt("0,,1000,0,0.5,0"), InvariantViolation);       // processed_size = 0
  EXPECT_THROW(attempt("0,,1000,2000,0.5,0"), InvariantViolation);    // grows when processed
  EXPECT_THROW(attempt("0,,1000,900,0,0"), InvariantViolation);       // zero cpu cost
  EXPECT_THROW(attempt("1,,1000,900,0.5,0"), InvariantViolation);     // sparse index
  EXPECT_NO_THROW(attempt("0,,1000,900,0.5,0"));
}

TEST(Manifest, ReportsViolatedField) {
  std::stringstream in(std::string(kManifestHeader) + "\n0,,1000,900,0,0\n");
  try {
    load_manifest(in);
    FAIL() << "expected InvariantViolation";
  } catch (const InvariantViolation& e) {
    EXPECT_EQ(e.field_name, "cpu_cost");
  }
}

}  // namespace
