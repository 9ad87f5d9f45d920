#pragma once

// One user session: a World, a Pipeline and a device adapter on a shared
// clock, recorded as a line-delimited trace.
//
// Trace records, one JSON object per line:
//   header    device, site, scene, sim and sEMG configuration, config hash
//   input     raw device event (the only records replay feeds back in)
//   rejected  device input the adapter refused
//   command   MenuCommand produced by the adapter
//   ignored   command the pipeline dropped, with the reason
//   request   engine request issued by the pipeline
//   event     world event (execution progress shows up in snapshots instead)
//   outcome   terminal result of one pick-and-place attempt
//   snapshot  pipeline state plus device panel, written whenever it changes
//   end       session end and whether it ran to completion
// Every record after the header carries "t"; times never decrease.

#include "hitl/jsonl.hpp"
#include "hitl/metrics.hpp"
#include "hitl/pipeline.hpp"
#include "hitl/service/adapters.hpp"
#include "hitl/signal/emg.hpp"
#include "hitl/sim/world.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hitl::service {

inline constexpr int kTraceVersion = 1;

struct SessionConfig {
  Device device = Device::Direct;
  metrics::Site site = metrics::Site::NotApplicable;
  sim::Scene scene = sim::default_scene();
  std::string scene_file;  // where the scene came from, informational only
  sim::SimConfig sim;
  signal::CalibrationConfig emg;
};

nlohmann::json to_json(const signal::CalibrationConfig& cfg);
signal::CalibrationConfig calibration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& cfg);
SessionConfig session_config_from_json(const nlohmann::json& j);
// Hash of everything that determines a session besides its inputs.
std::string config_hash(const SessionConfig& cfg);

class SessionTrace {
 public:
  void append(const nlohmann::json& record);
  const std::vector<std::string>& lines() const { return lines_; }
  // FNV-1a over every line including its terminating newline.
  std::string hash() const;
  void write(std::ostream& out) const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> lines_;
};

class Session {
 public:
  // Receives each snapshot body (with "t") as it is recorded.
  using SnapshotObserver = std::function<void(const nlohmann::json&)>;

  explicit Session(SessionConfig cfg);

  void set_observer(SnapshotObserver observer) { observer_ = std::move(observer); }

  // Requests the first recognition at t = 0. Must be called once, first.
  void start();
  // Runs every simulation step due at or before t.
  void advance_to(double t);
  // Throws InputError if t is earlier than the session clock. A client's own
  // timestamp is recorded alongside but never used for ordering.
  void input(double t, const DeviceInput& in, std::optional<double> client_t = std::nullopt);
  void finish(double t, bool complete);

  double now() const { return now_; }
  bool started() const { return started_; }
  bool finished() const { return finished_; }
  bool complete() const { return complete_; }
  const SessionConfig& config() const { return cfg_; }
  const pipeline::Pipeline& pipeline() const { return pipeline_; }
  const sim::World& world() const { return world_; }
  const DeviceAdapter& adapter() const { return *adapter_; }
  // Latest snapshot body, including "t".
  nlohmann::json snapshot() const;
  const SessionTrace& trace() const { return trace_; }

 private:
  void record(double t, const char* kind, const char* key, nlohmann::json body);
  void dispatch(double t, const std::vector<pipeline::EngineRequest>& requests);
  void on_world_events(double t, const std::vector<sim::WorldEvent>& events);
  void maybe_snapshot(double t);

  SessionConfig cfg_;
  sim::World world_;
  pipeline::Pipeline pipeline_;
  std::unique_ptr<DeviceAdapter> adapter_;
  SessionTrace trace_;
  SnapshotObserver observer_;
  nlohmann::json last_body_;
  double last_snapshot_t_ = 0.0;
  double now_ = 0.0;
  bool started_ = false;
  bool finished_ = false;
  bool complete_ = false;
};

struct ReplayResult {
  SessionTrace trace;
  std::vector<pipeline::TrialResult> trials;
  bool complete = false;
};

// Rebuilds the session from the header, feeds the recorded inputs back and
// checks every regenerated line against the original. Throws ReplayError
// naming the first offending line: missing header, time going backwards,
// malformed input record, or divergence.
ReplayResult replay(const std::vector<jsonl::Line>& lines);
ReplayResult replay_file(const std::string& path);

// Timing view of a trace for the metrics module.
metrics::Timeline timeline_from_trace(const std::vector<jsonl::Line>& lines);

}  // namespace hitl::service
