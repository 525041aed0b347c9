#pragma once

// Config-matrix benchmark harness. Every named scheduler configuration is
// run against the same per-repeat workload realizations (paired seeds), so
// config-to-config comparisons are not confounded by workload draw. Emits
// plot-ready CSV artifacts plus a fixed-width summary table.
//
// Artifact layout under BenchSpec::out_dir:
//   workloads/repeat_<r>.csv        one manifest per repeat, shared by all configs
//   runs/<key>/repeat_<r>/trace.csv event trace for that (config, repeat)
//   runs/<key>/repeat_<r>/spline.csv final estimator knots
//   metrics.csv                     one row per (config, repeat)
//   summary.csv                     one box-whisker row per config
//   summary.txt                     the human-readable table

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgestream/csv.hpp"
#include "edgestream/ratio_spline.hpp"
#include "edgestream/simulator.hpp"
#include "edgestream/trace.hpp"
#include "edgestream/workload.hpp"

namespace edgestream {

// Bench keys name a (cores, scheduler) pair: "<M>,s" is the spline
// scheduler on M cores with the matching priority upload order, "<M>,r"
// the random baseline, "0,r" the upload-everything-raw control, and
// "ffill,0" the control where every document is preprocessed before
// streaming begins.
inline SimConfig config_for_key(const std::string& key, const SimConfig& base) {
  SimConfig config = base;
  config.offline_preprocessed = false;
  auto comma = key.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= key.size()) {
    throw std::invalid_argument("bad bench key '" + key +
                                "': want '<cores>,s', '<cores>,r' or 'ffill,0'");
  }
  std::string cores = key.substr(0, comma);
  std::string scheduler = key.substr(comma + 1);
  if (cores == "ffill") {
    if (scheduler != "0") {
      throw std::invalid_argument("bad bench key '" + key +
                                  "': the preprocessed control is spelled 'ffill,0'");
    }
    config.num_cpu_slots = 0;
    config.process_policy = ProcessPolicy::no_processing();
    config.upload_policy = UploadPolicy::fifo();
    config.offline_preprocessed = true;
    return config;
  }

  std::size_t parsed = 0;
  unsigned long m = 0;
  try {
    m = std::stoul(cores, &parsed);
  } catch (const std::exception&) {
    parsed = 0;
  }
  if (parsed != cores.size()) {
    throw std::invalid_argument("bad bench key '" + key + "': cores must be a count or 'ffill'");
  }
  config.num_cpu_slots = static_cast<std::size_t>(m);

  // Zero cores means nothing can be processed, whatever the scheduler.
  std::uint32_t k = base.process_policy.kind == ProcessPolicy::Kind::SplinePriority
                        ? base.process_policy.sampling_period
                        : 5;
  if (scheduler == "s") {
    config.process_policy = m == 0 ? ProcessPolicy::no_processing()
                                   : ProcessPolicy::spline_priority(k);
    config.upload_policy = UploadPolicy::inverse_priority();
  } else if (scheduler == "r") {
    config.process_policy = m == 0 ? ProcessPolicy::no_processing()
                                   : ProcessPolicy::random_order();
    config.upload_policy = UploadPolicy::random_order();
  } else {
    throw std::invalid_argument("bad bench key '" + key + "': scheduler must be 's' or 'r'");
  }
  return config;
}

struct BenchSpec {
  // Workload source: a synthetic profile, or a manifest of measured
  // documents (the same manifest is replayed at every repeat).
  ProfileSpec profile;
  std::optional<std::filesystem::path> manifest;

  std::vector<std::string> configs = {"0,r",  "1,s", "2,s", "3,s",
                                      "1,r",  "2,r", "3,r", "ffill,0"};
  std::size_t repeats = 5;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir = "bench-out";
  SimConfig base;  // link capacity, upload slots, sampling period, ...

  // Key parse errors surface here, before any run starts.
  void validate() const {
    if (repeats == 0) throw std::invalid_argument("repeats must be >= 1");
    if (configs.empty()) throw std::invalid_argument("no bench configs given");
    std::set<std::string> seen;
    for (const std::string& key : configs) {
      if (!seen.insert(key).second) {
        throw std::invalid_argument("duplicate bench config '" + key + "'");
      }
      config_for_key(key, base);
    }
    if (!manifest) profile.validate();
  }
};

struct RepeatRecord {
  std::string config;
  std::size_t repeat = 0;
  double end_to_end_latency = 0.0;
  std::uint64_t bytes_uploaded = 0;
  std::uint64_t bytes_saved = 0;
  std::size_t docs_processed = 0;
};

struct ConfigSummary {
  std::string config;
  LatencySummary latency;
};

struct BenchResult {
  std::vector<ConfigSummary> summaries;  // in BenchSpec::configs order
  std::vector<RepeatRecord> runs;        // ordered by (config, repeat)
  std::string table;                     // fixed-width, one row per config
};

inline constexpr const char* kMetricsHeader =
    "config,repeat,end_to_end_latency,bytes_uploaded,bytes_saved,docs_processed";
inline constexpr const char* kSummaryHeader = "config,min,q1,median,q3,max";
inline constexpr const char* kSplineHeader = "index,ratio";

inline void save_metrics_csv(std::ostream& out, const std::vector<RepeatRecord>& runs) {
  out << kMetricsHeader << '\n';
  for (const RepeatRecord& r : runs) {
    out << quote_field(r.config) << ',' << r.repeat << ','
        << format_double(r.end_to_end_latency) << ','
        << r.bytes_uploaded << ',' << r.bytes_saved << ',' << r.docs_processed << '\n';
  }
}

inline std::vector<RepeatRecord> load_metrics_csv(std::istream& in) {
  std::vector<RepeatRecord> runs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != kMetricsHeader) {
        throw ParseError(1, std::string("bad metrics header, expected '") + kMetricsHeader + "'");
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 6) throw ParseError(line_number, "expected 6 columns");
    RepeatRecord r;
    r.config = fields[0];
    r.repeat = parse_u64(fields[1], line_number, "repeat");
    r.end_to_end_latency = parse_double(fields[2], line_number, "end_to_end_latency");
    r.bytes_uploaded = parse_u64(fields[3], line_number, "bytes_uploaded");
    r.bytes_saved = parse_u64(fields[4], line_number, "bytes_saved");
    r.docs_processed = parse_u64(fields[5], line_number, "docs_processed");
    runs.push_back(std::move(r));
  }
  return runs;
}

inline void save_summary_csv(std::ostream& out, const std::vector<ConfigSummary>& summaries) {
  out << kSummaryHeader << '\n';
  for (const ConfigSummary& s : summaries) {
    out << quote_field(s.config) << ',' << format_double(s.latency.min) << ','
        << format_double(s.latency.q1)
        << ',' << format_double(s.latency.median) << ',' << format_double(s.latency.q3) << ','
        << format_double(s.latency.max) << '\n';
  }
}

inline std::vector<ConfigSummary> load_summary_csv(std::istream& in) {
  std::vector<ConfigSummary> summaries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != kSummaryHeader) {
        throw ParseError(1, std::string("bad summary header, expected '") + kSummaryHeader + "'");
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 6) throw ParseError(line_number, "expected 6 columns");
    ConfigSummary s;
    s.config = fields[0];
    s.latency.min = parse_double(fields[1], line_number, "min");
    s.latency.q1 = parse_double(fields[2], line_number, "q1");
    s.latency.median = parse_double(fields[3], line_number, "median");
    s.latency.q3 = parse_double(fields[4], line_number, "q3");
    s.latency.max = parse_double(fields[5], line_number, "max");
    summaries.push_back(std::move(s));
  }
  return summaries;
}

inline void save_spline_csv(std::ostream& out, const RatioSpline& spline) {
  out << kSplineHeader << '\n';
  for (const RatioSpline::Knot& k : spline.knots()) {
    out << k.index << ',' << format_double(k.ratio) << '\n';
  }
}

inline RatioSpline load_spline_csv(std::istream& in) {
  RatioSpline spline;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != kSplineHeader) {
        throw ParseError(1, std::string("bad spline header, expected '") + kSplineHeader + "'");
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 2) throw ParseError(line_number, "expected 2 columns");
    spline.observe(parse_u32(fields[0], line_number, "index"),
                   parse_double(fields[1], line_number, "ratio"));
  }
  return spline;
}

namespace detail {

// Keys are drawn from a charset where only the comma is unfriendly to
// filesystems; "1,s" becomes directory "1_s".
inline std::string key_to_dirname(const std::string& key) {
  std::string name = key;
  for (char& c : name) {
    if (c == ',') c = '_';
  }
  return name;
}

inline void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace detail

inline std::string render_summary_table(const std::vector<ConfigSummary>& summaries) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "config" << std::right;
  for (const char* column : {"min", "q1", "median", "q3", "max"}) {
    out << std::setw(10) << column;
  }
  out << '\n';
  out << std::fixed << std::setprecision(2);
  for (const ConfigSummary& s : summaries) {
    out << std::left << std::setw(10) << s.config << std::right;
    out << std::setw(10) << s.latency.min << std::setw(10) << s.latency.q1 << std::setw(10)
        << s.latency.median << std::setw(10) << s.latency.q3 << std::setw(10) << s.latency.max;
    out << '\n';
  }
  return out.str();
}

inline BenchResult bench(const BenchSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;

  // Materialize the per-repeat workloads once; every config sees the same
  // realization at the same repeat index. A manifest source is simply
  // replayed at each repeat (the simulator seed still varies).
  std::vector<Workload> workloads;
  workloads.reserve(spec.repeats);
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    if (spec.manifest) {
      workloads.push_back(load_manifest(*spec.manifest));
    } else {
      ProfileSpec profile = spec.profile;
      profile.seed = mix_seed(spec.base_seed, r);
      workloads.push_back(generate(profile));
    }
  }

  fs::create_directories(spec.out_dir / "workloads");
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    detail::write_file(spec.out_dir / "workloads" / ("repeat_" + std::to_string(r) + ".csv"),
                       [&](std::ostream& out) { save_manifest(out, workloads[r]); });
  }

  BenchResult result;
  for (const std::string& key : spec.configs) {
    std::vector<double> latencies;
    latencies.reserve(spec.repeats);
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      SimConfig config = config_for_key(key, spec.base);
      // One simulator seed per repeat, shared by every config.
      config.seed = mix_seed(spec.base_seed, 0x10000000ULL + r);
      RunResult run_result = run(config, workloads[r]);

      fs::path run_dir =
          spec.out_dir / "runs" / detail::key_to_dirname(key) / ("repeat_" + std::to_string(r));
      fs::create_directories(run_dir);
      detail::write_file(run_dir / "trace.csv", [&](std::ostream& out) {
        write_trace_csv(out, run_result.trace);
      });
      detail::write_file(run_dir / "spline.csv", [&](std::ostream& out) {
        save_spline_csv(out, run_result.final_spline);
      });

      const RunMetrics& m = run_result.metrics;
      result.runs.push_back({key, r, m.end_to_end_latency, m.bytes_uploaded_total,
                             m.bytes_saved_total, m.docs_processed_at_edge});
      latencies.push_back(m.end_to_end_latency);
    }
    result.summaries.push_back({key, summarize_latencies(std::move(latencies))});
  }

  detail::write_file(spec.out_dir / "metrics.csv",
                     [&](std::ostream& out) { save_metrics_csv(out, result.runs); });
  detail::write_file(spec.out_dir / "summary.csv",
                     [&](std::ostream& out) { save_summary_csv(out, result.summaries); });
  result.table = render_summary_table(result.summaries);
  detail::write_file(spec.out_dir / "summary.txt",
                     [&](std::ostream& out) { out << result.table; });
  return result;
}

// ---------------------------------------------------------------------------
// Plot exports from completed run artifacts.

struct ExportPaths {
  std::filesystem::path workload_manifest;
  std::filesystem::path trace;
  std::filesystem::path spline;
  std::filesystem::path out_dir;
};

inline constexpr const char* kRatioProfileHeader = "index,true_ratio,spline_estimate,processed";

struct RatioProfileRow {
  std::uint32_t index = 0;
  double true_ratio = 0.0;
  double spline_estimate = 0.0;
  bool processed = false;
};

inline std::vector<RatioProfileRow> load_ratio_profile_csv(std::istream& in) {
  std::vector<RatioProfileRow> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != kRatioProfileHeader) {
        throw ParseError(1, std::string("bad ratio profile header, expected '") +
                                kRatioProfileHeader + "'");
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 4) throw ParseError(line_number, "expected 4 columns");
    RatioProfileRow row;
    row.index = parse_u32(fields[0], line_number, "index");
    row.true_ratio = parse_double(fields[1], line_number, "true_ratio");
    row.spline_estimate = parse_double(fields[2], line_number, "spline_estimate");
    if (fields[3] != "0" && fields[3] != "1") {
      throw ParseError(line_number, "processed flag must be 0 or 1");
    }
    row.processed = fields[3] == "1";
    rows.push_back(row);
  }
  return rows;
}

// Emits two plot-ready bundles from one finished run:
//   ratio_profile.csv  per-index ground truth vs final estimate vs processed flag
//   events.csv         the event trace with its prio/search selection labels
inline void export_figures(const ExportPaths& paths) {
  namespace fs = std::filesystem;
  std::string missing;
  for (const fs::path& p : {paths.workload_manifest, paths.trace, paths.spline}) {
    if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
  }
  if (!missing.empty()) throw std::runtime_error("missing run artifacts: " + missing);

  Workload workload = load_manifest(paths.workload_manifest);
  std::ifstream trace_in(paths.trace);
  std::vector<TraceEvent> trace = read_trace_csv(trace_in);
  std::ifstream spline_in(paths.spline);
  RatioSpline spline = load_spline_csv(spline_in);

  std::vector<bool> processed(workload.docs.size(), false);
  for (const TraceEvent& ev : trace) {
    if (ev.kind == TraceKind::ProcEnd && ev.doc_index < processed.size()) {
      processed[ev.doc_index] = true;
    }
  }

  fs::create_directories(paths.out_dir);
  detail::write_file(paths.out_dir / "ratio_profile.csv", [&](std::ostream& out) {
    out << kRatioProfileHeader << '\n';
    for (const WorkloadDoc& d : workload.docs) {
      out << d.index << ',' << format_double(workload.true_ratio(d.index)) << ','
          << format_double(spline.estimate(d.index)) << ',' << (processed[d.index] ? 1 : 0)
          << '\n';
    }
  });
  detail::write_file(paths.out_dir / "events.csv",
                     [&](std::ostream& out) { write_trace_csv(out, trace); });
}

// Optional companion script so the exported CSVs plot with stock gnuplot:
// `gnuplot plots.gp` next to ratio_profile.csv and events.csv.
inline void write_gnuplot_script(const std::filesystem::path& out_dir) {
  detail::write_file(out_dir / "plots.gp", [](std::ostream& out) {
    out << "set datafile separator comma\n"
           "set term pngcairo size 1200,500\n"
           "set key outside\n"
           "\n"
           "set output 'ratio_profile.png'\n"
           "set xlabel 'document index'\n"
           "set ylabel 'bytes saved per CPU second'\n"
           "plot 'ratio_profile.csv' skip 1 using 1:2 with lines title 'true ratio', \\\n"
           "     'ratio_profile.csv' skip 1 using 1:3 with lines title 'spline estimate', \\\n"
           "     'ratio_profile.csv' skip 1 using ($4==1?$1:1/0):2 with points pt 7 ps 0.4 "
           "title 'processed'\n"
           "\n"
           "set output 'events.png'\n"
           "set xlabel 'time (s)'\n"
           "set ylabel 'document index'\n"
           "plot 'events.csv' skip 1 using 1:2 with dots title 'events'\n";
  });
}

}  // namespace edgestream
