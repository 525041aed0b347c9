#pragma once

// The file-level operator the agent charges to a CPU slot: decode, threshold
// flood fill, re-encode. Reports the byte sizes and the thread CPU time of
// the invocation — exactly the measurement the ratio estimator consumes.

#include <algorithm>
#include <ctime>
#include <filesystem>

#include "edgestream/flood_fill.hpp"
#include "edgestream/png_io.hpp"

namespace edgestream {

struct OperatorReport {
  std::uint64_t original_size = 0;
  std::uint64_t processed_size = 0;
  double cpu_seconds = 0.0;
};

namespace detail {

inline double thread_cpu_now() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

}  // namespace detail

inline OperatorReport process_file(const std::filesystem::path& in,
                                   const std::filesystem::path& out,
                                   std::uint8_t threshold = 30,
                                   Connectivity connectivity = Connectivity::Four) {
  OperatorReport report;
  report.original_size = std::filesystem::file_size(in);
  double cpu_start = detail::thread_cpu_now();
  GrayImage img = read_gray_png(in);
  write_gray_png(out, threshold_flood_fill(img, threshold, connectivity));
  // Clamp below by the clock resolution: a zero cost would make the
  // CPU-normalized reduction undefined.
  report.cpu_seconds = std::max(detail::thread_cpu_now() - cpu_start, 1e-6);
  report.processed_size = std::filesystem::file_size(out);
  return report;
}

}  // namespace edgestream
