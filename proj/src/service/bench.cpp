#include "hitl/service/bench.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hitl::service {

namespace {

constexpr std::uint64_t kSessionSeedStream = 4;

std::uint64_t session_seed(std::uint64_t seed, std::size_t device_index, int session) {
  const std::uint64_t index = (static_cast<std::uint64_t>(device_index) << 32) | static_cast<std::uint32_t>(session);
  return sim::make_rng(seed, kSessionSeedStream, index)();
}

std::vector<jsonl::Line> as_lines(const SessionTrace& trace) {
  std::vector<jsonl::Line> out;
  out.reserve(trace.lines().size());
  std::size_t number = 0;
  for (const auto& line : trace.lines()) out.push_back({++number, nlohmann::json::parse(line)});
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

BenchDevice parse_bench_device(const std::string& name) {
  if (name == "semg") return {name, Device::Semg, true, metrics::Site::Forearm};
  if (name == "semg-forearm") return {name, Device::Semg, false, metrics::Site::Forearm};
  if (name == "semg-ear") return {name, Device::Semg, false, metrics::Site::Ear};
  const Device d = parse_device(name);
  if (d == Device::Semg) return {name, d, true, metrics::Site::Forearm};
  return {name, d, false, metrics::Site::NotApplicable};
}

BenchResult run_bench(const BenchOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (options.devices.empty()) throw std::invalid_argument("no devices given");
  if (!(options.ycb_failure >= 0.0 && options.ycb_failure <= 1.0)) {
    throw std::invalid_argument("ycb failure probability must lie in [0, 1]");
  }
  std::vector<BenchDevice> devices;
  for (const auto& name : options.devices) devices.push_back(parse_bench_device(name));

  BenchResult result;
  int incomplete = 0;
  for (std::size_t d = 0; d < devices.size(); ++d) {
    const auto& dev = devices[d];
    for (int i = 0; i < options.trials; ++i) {
      SessionConfig cfg;
      cfg.device = dev.device;
      cfg.site = dev.alternate_sites ? (i % 2 == 0 ? metrics::Site::Forearm : metrics::Site::Ear) : dev.site;
      cfg.scene = options.scene;
      cfg.scene_file = options.scene_file;
      cfg.sim = options.sim;
      cfg.sim.seed = session_seed(options.seed, d, i);
      if (options.ycb_failure > 0.0) {
        auto& ycb = cfg.sim.object_phase_failure["ycb"];
        ycb[static_cast<std::size_t>(sim::ExecPhase::Grasp)] = options.ycb_failure;
      }
      ScriptOptions script;
      script.seed = cfg.sim.seed;
      script.profile = default_profile(dev.device);
      script.retry_on_failure = options.retry_on_failure;

      Session session(cfg);
      run_scripted_user(session, script);
      const auto recorded = metrics::record(timeline_from_trace(as_lines(session.trace())));
      result.records.insert(result.records.end(), recorded.trials.begin(), recorded.trials.end());
      incomplete += recorded.incomplete;

      BenchSession summary{dev.name, cfg.site, i, cfg.sim.seed, session.complete(), session.trace().hash(), {}};
      if (options.keep_traces) summary.trace = session.trace();
      result.sessions.push_back(std::move(summary));
    }
  }
  result.report = metrics::summarize(result.records, incomplete);
  return result;
}

void write_bench_outputs(const BenchResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  write_file(root / "table.txt", metrics::export_report(result.report, metrics::Format::AlignedTable));
  write_file(root / "report.csv", metrics::export_report(result.report, metrics::Format::Csv));
  write_file(root / "report.json", metrics::export_report(result.report, metrics::Format::Structured));

  std::ostringstream sessions;
  sessions << "device,site,session,seed,complete,trace_hash\n";
  for (const auto& s : result.sessions) {
    sessions << s.device << ',' << metrics::site_name(s.site) << ',' << s.index << ',' << s.seed << ','
             << (s.complete ? "true" : "false") << ',' << s.trace_hash << '\n';
  }
  write_file(root / "sessions.csv", sessions.str());

  for (const auto& s : result.sessions) {
    if (s.trace.lines().empty()) continue;
    fs::create_directories(root / "traces");
    s.trace.save((root / "traces" / (s.device + "-" + std::to_string(s.index) + ".jsonl")).string());
  }
}

}  // namespace hitl::service
