#pragma once

// Batch evaluation: scripted sessions per device, summarized into the
// success and timing tables.

#include "hitl/metrics.hpp"
#include "hitl/service/scripted_user.hpp"
#include "hitl/sim/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hitl::service {

// A device column as named on the command line: mouse, voice (or alexa),
// switch, direct, semg (sessions alternate forearm/ear), semg-forearm,
// semg-ear. Throws std::invalid_argument on anything else.
struct BenchDevice {
  std::string name;
  Device device = Device::Direct;
  bool alternate_sites = false;
  metrics::Site site = metrics::Site::NotApplicable;
};
BenchDevice parse_bench_device(const std::string& name);

struct BenchOptions {
  std::vector<std::string> devices{"mouse", "voice", "switch", "semg"};
  int trials = 15;  // sessions per device, each attempting every object once
  std::uint64_t seed = 1;
  double ycb_failure = 0.0;  // grasp-phase failure probability for the ycb object
  bool retry_on_failure = false;
  bool keep_traces = false;
  sim::SimConfig sim;
  sim::Scene scene = sim::default_scene();
  std::string scene_file;
};

struct BenchSession {
  std::string device;
  metrics::Site site = metrics::Site::NotApplicable;
  int index = 0;
  std::uint64_t seed = 0;
  bool complete = false;
  std::string trace_hash;
  SessionTrace trace;  // empty unless keep_traces
};

struct BenchResult {
  metrics::MetricsReport report;
  std::vector<metrics::TrialRecord> records;
  std::vector<BenchSession> sessions;
};

// Deterministic in the options. Throws std::invalid_argument on bad options.
BenchResult run_bench(const BenchOptions& options);

// Writes table.txt, report.csv, report.json and sessions.csv into dir
// (created if missing), plus traces/ when traces were kept.
void write_bench_outputs(const BenchResult& result, const std::string& dir);

}  // namespace hitl::service
