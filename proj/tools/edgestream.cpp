// Unified command-line front end: run the simulator, the config-matrix
// bench, workload generation, the watch-directory agent, the ingestion
// gateway, and plot exports from saved run artifacts.

#include <signal.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "edgestream/agent.hpp"
#include "edgestream/bench.hpp"
#include "edgestream/gateway.hpp"
#include "edgestream/simulator.hpp"
#include "edgestream/workload.hpp"

namespace fs = std::filesystem;
using namespace edgestream;

namespace {

// Blocks the signals we orchestrate by hand (SIGUSR1 unblocks the waiter
// thread when a run finishes on its own). Must happen before any thread
// starts so the mask is inherited everywhere.
sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

void write_text_file(const fs::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Workload workload_from(const std::string& manifest, std::uint32_t docs, std::uint64_t seed) {
  if (!manifest.empty()) return load_manifest(fs::path(manifest));
  ProfileSpec profile = reference_profile(docs);
  profile.seed = seed;
  return generate(profile);
}

struct SimulateOpts {
  std::string workload;
  std::uint32_t docs = 759;
  std::size_t cores = 1;
  std::size_t uploads = 4;
  double capacity_mbps = 16.0;
  std::string process_policy = "splines";
  std::string upload_policy = "inverse";
  std::uint32_t sampling_period = 5;
  double upload_start_delay = 0.0;
  bool offline_preprocessed = false;
};

int run_simulate(const SimulateOpts& opt, std::uint64_t seed, const std::string& out) {
  SimConfig config;
  config.num_cpu_slots = opt.cores;
  config.max_concurrent_uploads = opt.uploads;
  config.link_capacity_mbps = opt.capacity_mbps;
  config.process_policy = ProcessPolicy::parse(opt.process_policy, opt.sampling_period);
  config.upload_policy = UploadPolicy::parse(opt.upload_policy);
  config.upload_start_delay = opt.upload_start_delay;
  config.offline_preprocessed = opt.offline_preprocessed;
  config.seed = seed;

  Workload workload = workload_from(opt.workload, opt.docs, seed);
  RunResult result = run(config, workload);

  const RunMetrics& m = result.metrics;
  std::cout << "documents            " << workload.docs.size() << '\n'
            << "end-to-end latency   " << format_double(m.end_to_end_latency) << " s\n"
            << "bytes uploaded       " << m.bytes_uploaded_total << '\n'
            << "bytes saved          " << m.bytes_saved_total << '\n'
            << "processed at edge    " << m.docs_processed_at_edge << '\n';

  if (!out.empty()) {
    fs::create_directories(out);
    write_text_file(fs::path(out) / "trace.csv",
                    [&](std::ostream& s) { write_trace_csv(s, result.trace); });
    write_text_file(fs::path(out) / "spline.csv",
                    [&](std::ostream& s) { save_spline_csv(s, result.final_spline); });
    std::cout << "artifacts under      " << out << '\n';
  }
  return 0;
}

struct BenchOpts {
  std::vector<std::string> keys;
  std::size_t repeats = 5;
  std::string workload;
  std::uint32_t docs = 759;
  std::size_t uploads = 4;
  double capacity_mbps = 16.0;
  std::uint32_t sampling_period = 5;
};

int run_bench(const BenchOpts& opt, std::uint64_t seed, const std::string& out) {
  BenchSpec spec;
  if (!opt.keys.empty()) spec.configs = opt.keys;
  spec.repeats = opt.repeats;
  spec.base_seed = seed;
  if (!opt.workload.empty()) {
    spec.manifest = fs::path(opt.workload);
  } else {
    spec.profile = reference_profile(opt.docs);
  }
  spec.base.max_concurrent_uploads = opt.uploads;
  spec.base.link_capacity_mbps = opt.capacity_mbps;
  spec.base.process_policy = ProcessPolicy::spline_priority(opt.sampling_period);
  if (!out.empty()) spec.out_dir = out;

  BenchResult result = bench(spec);
  std::cout << result.table << "artifacts under " << spec.out_dir.string() << '\n';
  return 0;
}

struct GenWorkloadOpts {
  std::uint32_t docs = 759;
  std::uint64_t mean_size = 1'000'000;
  double period = 0.30;
  bool no_ratio = false;
};

int run_gen_workload(const GenWorkloadOpts& opt, std::uint64_t seed, const std::string& out) {
  if (out.empty()) throw std::runtime_error("gen-workload needs --out FILE");
  ProfileSpec profile = reference_profile(opt.docs);
  profile.mean_size = opt.mean_size;
  profile.arrival.period_seconds = opt.period;
  profile.seed = seed;
  Workload workload = generate(profile);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_text_file(out, [&](std::ostream& s) { save_manifest(s, workload, !opt.no_ratio); });
  std::cout << "wrote " << workload.docs.size() << " documents to " << out << '\n';
  return 0;
}

struct AgentOpts {
  std::string watch;
  std::string gateway_url;
  std::string stream_id = "default";
  std::size_t cores = 1;
  std::size_t uploads = 4;
  std::string process_policy = "splines";
  std::string upload_policy = "inverse";
  std::uint32_t sampling_period = 5;
  double poll_interval = 0.25;
  int threshold = 30;
  int connectivity = 4;
  std::optional<std::size_t> expect;
  std::string trace_out;
};

int run_agent(const AgentOpts& opt, std::uint64_t seed, const std::string& out) {
  AgentConfig config;
  config.watch_dir = opt.watch;
  config.gateway_url = opt.gateway_url;
  config.stream_id = opt.stream_id;
  config.num_process_workers = opt.cores;
  config.num_upload_workers = opt.uploads;
  config.process_policy = ProcessPolicy::parse(opt.process_policy, opt.sampling_period);
  config.upload_policy = UploadPolicy::parse(opt.upload_policy);
  config.poll_interval = opt.poll_interval;
  config.threshold = static_cast<std::uint8_t>(opt.threshold);
  config.connectivity = opt.connectivity == 8 ? Connectivity::Eight : Connectivity::Four;
  config.seed = seed;
  config.expected_documents = opt.expect;

  sigset_t signals = block_termination_signals();
  Agent agent(config);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    agent.stop();
  });
  AgentResult result = agent.run();
  ::kill(::getpid(), SIGUSR1);  // unblock the waiter if the run ended on its own
  waiter.join();

  if (!out.empty()) {
    fs::create_directories(out);
    write_text_file(fs::path(out) / "trace.csv",
                    [&](std::ostream& s) { write_trace_csv(s, result.trace); });
    write_text_file(fs::path(out) / "spline.csv",
                    [&](std::ostream& s) { save_spline_csv(s, result.final_spline); });
  }
  if (!opt.trace_out.empty()) {
    fs::path path(opt.trace_out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(path, [&](std::ostream& s) { write_trace_csv(s, result.trace); });
  }
  std::cout << "uploaded " << result.documents_uploaded << " documents ("
            << result.documents_processed << " processed at the edge)\n";
  if (!result.ok) {
    std::cerr << "edgestream agent: " << result.error << '\n';
    return 1;
  }
  return 0;
}

struct GatewayOpts {
  std::string listen = "127.0.0.1";
  int port = 8080;
  std::string storage;
  std::uint64_t max_body = 256ull * 1024 * 1024;
};

int run_gateway(const GatewayOpts& opt) {
  GatewayConfig config;
  config.listen_address = opt.listen;
  config.listen_port = opt.port;
  // --listen also accepts the combined ADDR:PORT form.
  std::size_t colon = opt.listen.rfind(':');
  if (colon != std::string::npos &&
      opt.listen.find_first_not_of("0123456789", colon + 1) == std::string::npos &&
      colon + 1 < opt.listen.size()) {
    config.listen_address = opt.listen.substr(0, colon);
    config.listen_port = std::stoi(opt.listen.substr(colon + 1));
  }
  config.storage_dir = opt.storage;
  config.max_body = opt.max_body;

  sigset_t signals = block_termination_signals();
  Gateway gateway(config);
  gateway.start();
  std::cout << "listening on http://" << gateway.config().listen_address << ':'
            << gateway.config().listen_port << ", storing under " << opt.storage << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  gateway.stop();
  std::cout << "stored " << gateway.documents_stored() << " documents\n";
  return 0;
}

struct ExportOpts {
  std::string workload;
  std::string trace;
  std::string spline;
  bool gnuplot = false;
};

int run_export(const ExportOpts& opt, const std::string& out) {
  if (out.empty()) throw std::runtime_error("export needs --out DIR");
  ExportPaths paths;
  paths.workload_manifest = opt.workload;
  paths.trace = opt.trace;
  paths.spline = opt.spline;
  paths.out_dir = out;
  export_figures(paths);
  std::cout << "wrote " << (paths.out_dir / "ratio_profile.csv").string() << " and "
            << (paths.out_dir / "events.csv").string() << '\n';
  if (opt.gnuplot) {
    write_gnuplot_script(paths.out_dir);
    std::cout << "wrote " << (paths.out_dir / "plots.gp").string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"message-level scheduling toolkit for stream processing at the cloud edge"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read option defaults from a TOML/INI file");

  std::uint64_t seed = 0;
  std::string out;
  int exit_code = 0;
  app.add_option("--seed", seed, "Base RNG seed")->capture_default_str();
  app.add_option("--out", out, "Output file or directory");

  SimulateOpts sim;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Run one scheduler configuration and print run metrics");
  simulate_cmd->fallthrough();
  CLI::Option* sim_workload =
      simulate_cmd->add_option("--workload", sim.workload, "Workload manifest CSV");
  simulate_cmd->add_option("--docs", sim.docs, "Synthetic stream length")
      ->capture_default_str()
      ->excludes(sim_workload);
  simulate_cmd->add_option("--cores", sim.cores, "Edge processing slots")->capture_default_str();
  simulate_cmd->add_option("--uploads", sim.uploads, "Concurrent uploads")->capture_default_str();
  simulate_cmd->add_option("--capacity-mbps", sim.capacity_mbps, "Link capacity in Mbit/s")
      ->capture_default_str();
  simulate_cmd->add_option("--process-policy", sim.process_policy, "splines|random|fifo|none")
      ->check(CLI::IsMember({"splines", "random", "fifo", "none"}))
      ->capture_default_str();
  simulate_cmd->add_option("--upload-policy", sim.upload_policy, "inverse|fifo|random")
      ->check(CLI::IsMember({"inverse", "fifo", "random"}))
      ->capture_default_str();
  simulate_cmd
      ->add_option("--sampling-period", sim.sampling_period,
                   "Every Kth processing decision explores")
      ->capture_default_str();
  simulate_cmd
      ->add_option("--upload-start-delay", sim.upload_start_delay,
                   "Per-upload setup time in seconds")
      ->capture_default_str();
  simulate_cmd->add_flag("--offline-preprocessed", sim.offline_preprocessed,
                         "Replace sizes with processed sizes before streaming");
  simulate_cmd->callback([&] { exit_code = run_simulate(sim, seed, out); });

  BenchOpts bench_opts;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Run the named config matrix over paired per-repeat workloads");
  bench_cmd->fallthrough();
  bench_cmd->add_option("--key", bench_opts.keys,
                        "Config key like 0,r 1,s 2,r ffill,0 (repeatable; default full matrix)");
  bench_cmd->add_option("--repeats", bench_opts.repeats, "Repeats per config")
      ->capture_default_str();
  CLI::Option* bench_workload =
      bench_cmd->add_option("--workload", bench_opts.workload, "Workload manifest CSV");
  bench_cmd->add_option("--docs", bench_opts.docs, "Synthetic stream length")
      ->capture_default_str()
      ->excludes(bench_workload);
  bench_cmd->add_option("--uploads", bench_opts.uploads, "Concurrent uploads")
      ->capture_default_str();
  bench_cmd->add_option("--capacity-mbps", bench_opts.capacity_mbps, "Link capacity in Mbit/s")
      ->capture_default_str();
  bench_cmd
      ->add_option("--sampling-period", bench_opts.sampling_period,
                   "Every Kth processing decision explores")
      ->capture_default_str();
  bench_cmd->callback([&] { exit_code = run_bench(bench_opts, seed, out); });

  GenWorkloadOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-workload", "Write a synthetic workload manifest");
  gen_cmd->fallthrough();
  gen_cmd->add_option("--docs", gen.docs, "Documents to generate")->capture_default_str();
  gen_cmd->add_option("--mean-size", gen.mean_size, "Mean document size in bytes")
      ->capture_default_str();
  gen_cmd->add_option("--period", gen.period, "Mean arrival period in seconds")
      ->capture_default_str();
  gen_cmd->add_flag("--no-ratio", gen.no_ratio, "Omit the ground-truth ratio column");
  gen_cmd->callback([&] { exit_code = run_gen_workload(gen, seed, out); });

  AgentOpts agent_opts;
  CLI::App* agent_cmd =
      app.add_subcommand("agent", "Watch a directory, process documents, upload to a gateway");
  agent_cmd->fallthrough();
  agent_cmd->add_option("--watch", agent_opts.watch, "Directory to watch")->required();
  agent_cmd->add_option("--gateway", agent_opts.gateway_url, "Gateway base URL")->required();
  agent_cmd->add_option("--stream,--stream-id", agent_opts.stream_id, "Stream id at the gateway")
      ->capture_default_str();
  agent_cmd->add_option("--cores,--process-workers", agent_opts.cores, "Processing workers")
      ->capture_default_str();
  agent_cmd->add_option("--uploads,--upload-workers", agent_opts.uploads, "Upload workers")
      ->capture_default_str();
  agent_cmd->add_option("--process-policy", agent_opts.process_policy, "splines|random|fifo|none")
      ->check(CLI::IsMember({"splines", "random", "fifo", "none"}))
      ->capture_default_str();
  agent_cmd->add_option("--upload-policy", agent_opts.upload_policy, "inverse|fifo|random")
      ->check(CLI::IsMember({"inverse", "fifo", "random"}))
      ->capture_default_str();
  agent_cmd
      ->add_option("--sampling-period", agent_opts.sampling_period,
                   "Every Kth processing decision explores")
      ->capture_default_str();
  agent_cmd->add_option("--poll", agent_opts.poll_interval, "Directory poll interval in seconds")
      ->capture_default_str();
  agent_cmd->add_option("--threshold", agent_opts.threshold, "Flood-fill gray threshold")
      ->check(CLI::Range(0, 255))
      ->capture_default_str();
  agent_cmd->add_option("--connectivity", agent_opts.connectivity, "Fill connectivity, 4 or 8")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  agent_cmd->add_option("--expect", agent_opts.expect,
                        "Exit after this many uploads (default: run until Ctrl-C)");
  agent_cmd->add_option("--trace-out", agent_opts.trace_out,
                        "Write the session trace CSV to this exact file");
  agent_cmd->callback([&] { exit_code = run_agent(agent_opts, seed, out); });

  GatewayOpts gateway_opts;
  CLI::App* gateway_cmd =
      app.add_subcommand("gateway", "Serve the document ingestion endpoint");
  gateway_cmd->fallthrough();
  gateway_cmd->add_option("--listen", gateway_opts.listen, "Listen address, or ADDR:PORT")
      ->capture_default_str();
  gateway_cmd->add_option("--port", gateway_opts.port, "Listen port (0 picks a free one)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  gateway_cmd->add_option("--storage", gateway_opts.storage, "Storage directory")->required();
  gateway_cmd->add_option("--max-body", gateway_opts.max_body, "Largest accepted body in bytes")
      ->capture_default_str();
  gateway_cmd->callback([&] { exit_code = run_gateway(gateway_opts); });

  ExportOpts export_opts;
  CLI::App* export_cmd =
      app.add_subcommand("export", "Emit plot-ready CSV bundles from saved run artifacts");
  export_cmd->fallthrough();
  export_cmd->add_option("--workload", export_opts.workload, "Workload manifest CSV")->required();
  export_cmd->add_option("--trace", export_opts.trace, "Run trace CSV")->required();
  export_cmd->add_option("--spline", export_opts.spline, "Final estimator knots CSV")->required();
  export_cmd->add_flag("--gnuplot", export_opts.gnuplot, "Also write a gnuplot script");
  export_cmd->callback([&] { exit_code = run_export(export_opts, out); });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "edgestream: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
