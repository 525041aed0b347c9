#pragma once

// Synthetic workload generation with locally-correlated reduction ratios,
// plus manifest ingestion for measured image corpora.
//
// The reduction fraction over document index is a sum of raised-cosine
// bumps (plus a little additive noise), clamped to [0, 0.4]: a smooth,
// irregular profile where neighboring documents reduce similarly. That
// local correlation is exactly what the spline scheduler exploits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgestream/csv.hpp"
#include "edgestream/rng.hpp"

namespace edgestream {

struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvariantViolation : std::runtime_error {
  InvariantViolation(const std::string& field, const std::string& message)
      : std::runtime_error("workload invariant violated (" + field + "): " + message),
        field_name(field) {}
  std::string field_name;
};

struct WorkloadDoc {
  std::uint32_t index = 0;
  double arrival_time = 0.0;
  std::uint64_t original_size = 0;
  std::uint64_t processed_size = 0;
  double cpu_cost = 0.0;
  std::string path;  // optional; empty for synthetic documents
};

struct Workload {
  std::vector<WorkloadDoc> docs;

  // Ground-truth CPU-normalized reduction, exact per document.
  double true_ratio(std::uint32_t index) const {
    const WorkloadDoc& d = docs.at(index);
    return static_cast<double>(d.original_size - d.processed_size) / d.cpu_cost;
  }

  void validate() const {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const WorkloadDoc& d = docs[i];
      if (d.index != i) {
        throw InvariantViolation("index", "indices must be dense 0..n-1, got " +
                                              std::to_string(d.index) + " at row " +
                                              std::to_string(i));
      }
      if (d.original_size == 0) {
        throw InvariantViolation("original_size", "must be > 0 at index " + std::to_string(i));
      }
      if (d.processed_size == 0 || d.processed_size > d.original_size) {
        throw InvariantViolation("processed_size", "must be in (0, original_size] at index " +
                                                       std::to_string(i));
      }
      if (d.cpu_cost <= 0.0) {
        throw InvariantViolation("cpu_cost", "must be > 0 at index " + std::to_string(i));
      }
      if (i > 0 && d.arrival_time < docs[i - 1].arrival_time) {
        throw InvariantViolation("arrival_time",
                                 "must be non-decreasing at index " + std::to_string(i));
      }
    }
  }
};

// One smooth region of elevated reduction: peak * 0.5 * (1 + cos(pi*u))
// for u = (i - center) / width in [-1, 1], zero outside.
struct RatioBump {
  double center = 0.0;
  double width = 1.0;   // half-support, in index units
  double peak = 0.0;    // reduction fraction at the center, <= 0.4
};

struct CpuCostModel {
  double base_seconds = 0.30;       // fixed per-document overhead (open/modify)
  double seconds_per_byte = 0.5e-6;
  double jitter = 0.10;             // multiplicative, uniform in [1-j, 1+j)
};

struct ArrivalModel {
  double period_seconds = 0.30;
  double jitter = 0.20;  // per-gap multiplicative jitter, uniform in [1-j, 1+j)
};

// Defaults are the reference workload used by the bench harness: sized so
// that one CPU core can process roughly half the stream in real time while
// the upload link stays the bottleneck.
struct ProfileSpec {
  std::uint32_t n_docs = 759;
  std::uint64_t mean_size = 1'000'000;
  double size_jitter = 0.05;
  std::vector<RatioBump> bumps = {
      {80.0, 60.0, 0.38}, {200.0, 45.0, 0.20}, {330.0, 90.0, 0.40},
      {480.0, 55.0, 0.28}, {600.0, 75.0, 0.36}, {710.0, 40.0, 0.18},
  };
  double noise = 0.01;  // additive on the reduction fraction
  CpuCostModel cpu_cost;
  ArrivalModel arrival;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_docs == 0) throw InvalidSpec("n_docs must be > 0");
    if (mean_size == 0) throw InvalidSpec("mean_size must be > 0");
    if (size_jitter < 0.0 || size_jitter >= 1.0) throw InvalidSpec("size_jitter must be in [0,1)");
    if (noise < 0.0 || noise >= 1.0) throw InvalidSpec("noise must be in [0,1)");
    for (const RatioBump& b : bumps) {
      if (b.peak < 0.0 || b.peak > 0.4) throw InvalidSpec("bump peak must be in [0, 0.4]");
      if (b.width <= 0.0) throw InvalidSpec("bump width must be > 0");
    }
    if (cpu_cost.base_seconds < 0.0 || cpu_cost.seconds_per_byte < 0.0 ||
        (cpu_cost.base_seconds == 0.0 && cpu_cost.seconds_per_byte == 0.0)) {
      throw InvalidSpec("cpu cost model must be positive");
    }
    if (cpu_cost.jitter < 0.0 || cpu_cost.jitter >= 1.0) {
      throw InvalidSpec("cpu jitter must be in [0,1)");
    }
    if (arrival.period_seconds < 0.0) throw InvalidSpec("arrival period must be >= 0");
    if (arrival.jitter < 0.0 || arrival.jitter >= 1.0) {
      throw InvalidSpec("arrival jitter must be in [0,1)");
    }
  }
};

// The default profile rescaled to a different stream length: bump centers
// and widths stretch proportionally, so the reduction landscape keeps its
// shape at any document count.
inline ProfileSpec reference_profile(std::uint32_t n_docs) {
  ProfileSpec spec;
  if (n_docs == 0) throw InvalidSpec("n_docs must be > 0");
  double scale = static_cast<double>(n_docs) / spec.n_docs;
  for (RatioBump& b : spec.bumps) {
    b.center *= scale;
    b.width *= scale;
  }
  spec.n_docs = n_docs;
  return spec;
}

// Noise-free bump profile at (fractional) index i.
inline double profile_fraction(const ProfileSpec& spec, double i) {
  double total = 0.0;
  for (const RatioBump& b : spec.bumps) {
    double u = (i - b.center) / b.width;
    if (u <= -1.0 || u >= 1.0) continue;
    total += b.peak * 0.5 * (1.0 + std::cos(std::numbers::pi * u));
  }
  return std::clamp(total, 0.0, 0.4);
}

inline Workload generate(const ProfileSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, 0x776bULL));
  Workload workload;
  workload.docs.reserve(spec.n_docs);
  double arrival = 0.0;
  for (std::uint32_t i = 0; i < spec.n_docs; ++i) {
    WorkloadDoc doc;
    doc.index = i;

    arrival += spec.arrival.period_seconds *
               (1.0 + spec.arrival.jitter * rng.real(-1.0, 1.0));
    doc.arrival_time = arrival;

    double size = static_cast<double>(spec.mean_size) *
                  (1.0 + spec.size_jitter * rng.real(-1.0, 1.0));
    doc.original_size = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(size));

    double fraction = profile_fraction(spec, static_cast<double>(i)) +
                      spec.noise * rng.real(-1.0, 1.0);
    fraction = std::clamp(fraction, 0.0, 0.4);
    doc.processed_size = std::max<std::uint64_t>(
        1, doc.original_size - static_cast<std::uint64_t>(fraction * size));

    double cost = spec.cpu_cost.base_seconds +
                  spec.cpu_cost.seconds_per_byte * static_cast<double>(doc.original_size);
    cost *= 1.0 + spec.cpu_cost.jitter * rng.real(-1.0, 1.0);
    doc.cpu_cost = std::max(cost, 1e-9);

    workload.docs.push_back(doc);
  }
  workload.validate();
  return workload;
}

inline constexpr const char* kManifestHeader =
    "index,path,original_size,processed_size,cpu_cost,arrival_time";

// Manifest CSV, optionally with the ground-truth ratio column appended.
inline void save_manifest(std::ostream& out, const Workload& workload, bool with_ratio = true) {
  out << kManifestHeader << (with_ratio ? ",ratio" : "") << '\n';
  for (const WorkloadDoc& d : workload.docs) {
    out << d.index << ',' << d.path << ',' << d.original_size << ',' << d.processed_size << ','
        << format_double(d.cpu_cost) << ',' << format_double(d.arrival_time);
    if (with_ratio) out << ',' << format_double(workload.true_ratio(d.index));
    out << '\n';
  }
}

inline Workload load_manifest(std::istream& in) {
  Workload workload;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (line_number == 1) {
      if (fields.size() < 6 ||
          line.rfind(kManifestHeader, 0) != 0) {
        throw ParseError(1, std::string("bad manifest header, expected '") + kManifestHeader +
                                "[,ratio]'");
      }
      continue;
    }
    if (fields.size() < 6) throw ParseError(line_number, "expected at least 6 columns");
    WorkloadDoc doc;
    doc.index = parse_u32(fields[0], line_number, "index");
    doc.path = fields[1];
    doc.original_size = parse_u64(fields[2], line_number, "original_size");
    doc.processed_size = parse_u64(fields[3], line_number, "processed_size");
    doc.cpu_cost = parse_double(fields[4], line_number, "cpu_cost");
    doc.arrival_time = parse_double(fields[5], line_number, "arrival_time");
    workload.docs.push_back(doc);
  }
  workload.validate();
  return workload;
}

inline Workload load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  return load_manifest(in);
}

}  // namespace edgestream
