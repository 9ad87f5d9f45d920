// Command-line front end: live server, trace replay, batch bench, and small
// utilities for the signal and switch protocols.
//
// Exit codes: 0 success, 1 usage or input error, 2 replay failure.

#include "hitl/errors.hpp"
#include "hitl/jsonl.hpp"
#include "hitl/service/bench.hpp"
#include "hitl/service/scripted_user.hpp"
#include "hitl/service/server.hpp"
#include "hitl/service/session.hpp"
#include "hitl/signal/emg.hpp"
#include "hitl/signal/simd_kernels.hpp"
#include "hitl/switch_proto.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace hitl;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitReplay = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

service::SessionConfig session_config(const std::string& device, const std::string& site,
                                      const std::string& scene_file, std::uint64_t seed, bool ideal) {
  service::SessionConfig cfg;
  cfg.device = parse_device(device);
  cfg.site = metrics::parse_site(site);
  if (cfg.device == Device::Semg && cfg.site == metrics::Site::NotApplicable) cfg.site = metrics::Site::Forearm;
  if (!scene_file.empty()) {
    cfg.scene = sim::load_scene_file(scene_file);
    cfg.scene_file = scene_file;
  }
  if (ideal) cfg.sim = sim::SimConfig::ideal();
  cfg.sim.seed = seed;
  return cfg;
}

int run_serve(std::uint16_t port, const std::string& device, const std::string& site,
              const std::string& scene_file, std::uint64_t seed, const std::string& trace_dir) {
  service::ServeOptions opt;
  opt.port = port;
  opt.session = session_config(device, site, scene_file, seed, false);
  opt.trace_dir = trace_dir;
  boost::asio::io_context io;
  service::Server server(io, opt);
  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) { server.stop(); });
  std::cout << "listening on port " << server.port() << std::endl;
  io.run();
  if (!server.last_trace_path().empty()) std::cout << "last trace: " << server.last_trace_path() << '\n';
  return 0;
}

int run_replay(const std::string& path, const std::string& expected_hash) {
  try {
    const auto result = service::replay_file(path);
    const std::string hash = result.trace.hash();
    std::cout << "records: " << result.trace.lines().size() << '\n'
              << "trials: " << result.trials.size() << '\n'
              << "complete: " << (result.complete ? "yes" : "no") << '\n'
              << "hash: " << hash << '\n';
    if (!expected_hash.empty() && expected_hash != hash) {
      std::cerr << "hash mismatch: expected " << expected_hash << ", got " << hash << '\n';
      return kExitReplay;
    }
    return 0;
  } catch (const ReplayError& e) {
    std::cerr << path << ":" << e.line() << ": " << e.what() << '\n';
    return kExitReplay;
  }
}

int run_record(const std::string& device, const std::string& site, const std::string& scene_file,
               std::uint64_t seed, bool ideal, bool retry, const std::string& out_path) {
  const auto cfg = session_config(device, site, scene_file, seed, ideal);
  service::ScriptOptions script;
  script.seed = seed;
  script.profile = service::default_profile(cfg.device);
  script.retry_on_failure = retry;
  const auto trace = service::record_scripted(cfg, script);
  trace.save(out_path);
  std::cout << "records: " << trace.lines().size() << '\n' << "hash: " << trace.hash() << '\n';
  return 0;
}

int run_bench(service::BenchOptions opt, const std::string& out_dir) {
  const auto result = service::run_bench(opt);
  service::write_bench_outputs(result, out_dir);
  std::cout << metrics::export_report(result.report, metrics::Format::AlignedTable);
  return 0;
}

int run_report(const std::vector<std::string>& traces, const std::string& out_dir) {
  std::vector<metrics::TrialRecord> records;
  int incomplete = 0;
  for (const auto& path : traces) {
    const auto recorded = metrics::record(service::timeline_from_trace(jsonl::read_file(path)));
    records.insert(records.end(), recorded.trials.begin(), recorded.trials.end());
    incomplete += recorded.incomplete;
  }
  service::BenchResult result;
  result.records = records;
  result.report = metrics::summarize(records, incomplete);
  service::write_bench_outputs(result, out_dir);
  std::cout << metrics::export_report(result.report, metrics::Format::AlignedTable);
  return 0;
}

int run_emg(const std::string& frames_path, const std::string& calibration_path) {
  signal::CalibrationConfig cfg;
  if (!calibration_path.empty()) {
    auto in = open_input(calibration_path);
    cfg = service::calibration_from_json(nlohmann::json::parse(in));
  }
  auto in = open_input(frames_path);
  const auto frames = signal::read_frames(in);
  signal::write_actions(std::cout, signal::process_frames(frames, cfg));
  return 0;
}

int run_calibrate(const std::string& rest_path, const std::string& flex_path) {
  auto rest_in = open_input(rest_path);
  auto flex_in = open_input(flex_path);
  const auto rest = signal::read_frames(rest_in);
  const auto flex = signal::read_frames(flex_in);
  std::cout << service::to_json(signal::calibrate(rest, flex)).dump(2) << '\n';
  return 0;
}

int run_switch(const std::string& events_path) {
  auto in = open_input(events_path);
  switch_proto::SwitchState state;
  for (const auto& ev : switch_proto::read_events(in)) {
    auto [next, cmd] = switch_proto::on_event(state, ev);
    state = next;
    if (cmd) jsonl::write(std::cout, {{"t", ev.t}, {"cmd", command_name(*cmd)}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-in-the-loop grasp pipeline: live service, replay and benchmarks"};
  app.require_subcommand(1);

  std::uint16_t port = 7878;
  std::string device = "direct";
  std::string site = "n/a";
  std::string scene_file;
  std::uint64_t seed = 1;
  std::string trace_dir = "traces";
  auto* serve = app.add_subcommand("serve", "Run the live TCP session service");
  serve->add_option("--port", port, "TCP port (0 picks one)")->capture_default_str();
  serve->add_option("--scene", scene_file, "Scene JSON file (default: built-in scene)");
  serve->add_option("--device", device, "semg | switch | voice | direct | mouse")->capture_default_str();
  serve->add_option("--site", site, "sEMG electrode site: forearm | ear")->capture_default_str();
  serve->add_option("--seed", seed, "Simulation seed")->capture_default_str();
  serve->add_option("--trace-dir", trace_dir, "Where session traces are written")->capture_default_str();

  std::string trace_path;
  std::string verify_hash;
  auto* replay = app.add_subcommand("replay", "Re-run a session trace and check it reproduces");
  replay->add_option("--trace", trace_path, "Session trace file")->required();
  replay->add_option("--verify-hash", verify_hash, "Expected trace hash");

  std::string record_out;
  bool ideal = false;
  bool retry = false;
  auto* record = app.add_subcommand("record", "Record one scripted session trace");
  record->add_option("--device", device, "semg | switch | voice | direct | mouse")->capture_default_str();
  record->add_option("--site", site, "sEMG electrode site: forearm | ear")->capture_default_str();
  record->add_option("--scene", scene_file, "Scene JSON file");
  record->add_option("--seed", seed, "Seed for simulation and user")->capture_default_str();
  record->add_option("--out", record_out, "Trace file to write")->required();
  record->add_flag("--ideal", ideal, "No recognition noise or failures");
  record->add_flag("--retry-on-failure", retry, "Re-attempt failed objects");

  service::BenchOptions bench_opt;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Scripted sessions for each device, summarized");
  bench->add_option("--devices", bench_opt.devices, "mouse,voice,switch,semg,semg-forearm,semg-ear,direct")
      ->delimiter(',');
  bench->add_option("--trials", bench_opt.trials, "Sessions per device")->capture_default_str();
  bench->add_option("--seed", bench_opt.seed, "Master seed")->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory")->required();
  bench->add_option("--scene", scene_file, "Scene JSON file");
  bench->add_option("--ycb-failure", bench_opt.ycb_failure, "Grasp-phase failure probability for ycb");
  bench->add_flag("--retry-on-failure", bench_opt.retry_on_failure, "Re-attempt failed objects");
  bench->add_flag("--keep-traces", bench_opt.keep_traces, "Also write every session trace");

  std::vector<std::string> report_traces;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Summarize recorded session traces");
  report->add_option("--traces", report_traces, "Session trace files")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::string frames_path;
  std::string calibration_path;
  auto* emg = app.add_subcommand("emg", "Classify sEMG frames into cursor actions");
  emg->add_option("--frames", frames_path, "Frames, one {\"t\",\"v\"} per line")->required();
  emg->add_option("--calibration", calibration_path, "Calibration JSON");

  std::string rest_path;
  std::string flex_path;
  auto* calibrate = app.add_subcommand("calibrate", "Derive sEMG thresholds from rest and flex recordings");
  calibrate->add_option("--rest", rest_path, "Rest frames")->required();
  calibrate->add_option("--flex", flex_path, "Flex frames")->required();

  std::string events_path;
  auto* sw = app.add_subcommand("switch", "Translate switch press/release events into commands");
  sw->add_option("--events", events_path, "Events, one {\"t\",\"kind\"} per line")->required();

  std::string scene_out;
  auto* scene = app.add_subcommand("scene", "Write the built-in scene as JSON");
  scene->add_option("--out", scene_out, "Scene file to write")->required();

  auto* simd = app.add_subcommand("simd", "Show the instruction sets the RMS kernel can use");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*serve) return run_serve(port, device, site, scene_file, seed, trace_dir);
    if (*replay) return run_replay(trace_path, verify_hash);
    if (*record) return run_record(device, site, scene_file, seed, ideal, retry, record_out);
    if (*bench) {
      if (!scene_file.empty()) {
        bench_opt.scene = sim::load_scene_file(scene_file);
        bench_opt.scene_file = scene_file;
      }
      return run_bench(bench_opt, bench_out);
    }
    if (*report) return run_report(report_traces, report_out);
    if (*emg) return run_emg(frames_path, calibration_path);
    if (*calibrate) return run_calibrate(rest_path, flex_path);
    if (*sw) return run_switch(events_path);
    if (*scene) {
      sim::save_scene_file(sim::default_scene(), scene_out);
      return 0;
    }
    if (*simd) {
      for (auto isa : signal::kernels::supported_isas()) std::cout << signal::kernels::isa_name(isa) << '\n';
      std::cout << "active: " << signal::kernels::isa_name(signal::kernels::active_isa()) << '\n';
      return 0;
    }
  } catch (const ReplayError& e) {
    std::cerr << "line " << e.line() << ": " << e.what() << '\n';
    return kExitReplay;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
