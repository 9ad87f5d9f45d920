#pragma once

// Simulated robot side of a session: recognition stub, top-down grasp
// synthesis for blocks and cylinders, a geometric reachability test in place
// of a motion planner, and a four-phase pausable execution. All randomness
// comes from (seed, stream, index)-derived generators, so a session is a pure
// function of its seed and input trace.

#include "hitl/sim/scene.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hitl::sim {

enum class ExecPhase { Approach = 0, Grasp = 1, Lift = 2, Place = 3 };
inline constexpr std::size_t kPhaseCount = 4;

std::string_view phase_name(ExecPhase phase);

using PhaseArray = std::array<double, kPhaseCount>;

struct SimConfig {
  std::uint64_t seed = 1;
  Box workspace{{-400.0, -400.0, 0.0}, {400.0, 400.0, 500.0}};
  double max_aperture = 120.0;              // mm
  double recognition_sigma = 2.0;           // mm, x and y
  double recognition_yaw_sigma = 0.02;      // rad
  double recognition_failure = 0.05;        // per object
  double recognition_duration = 2.0;        // s
  PhaseArray phase_failure{0.0, 0.0, 0.0, 0.0};
  std::map<std::string, PhaseArray> object_phase_failure;  // by object label
  PhaseArray phase_durations{15.0, 12.0, 13.0, 18.0};      // s
  double standoff = 100.0;     // mm above the grasp centre
  double lift_height = 150.0;  // mm
  double dt = 0.05;            // s per simulation step
  int cylinder_azimuths = 4;

  // Throws std::invalid_argument.
  void validate() const;
  // No recognition noise and no failures anywhere.
  static SimConfig ideal();

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

nlohmann::json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

using Rng = std::mt19937_64;

// Independent generator per (seed, stream, index).
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class RecognitionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Detects pick-area objects; each is found with probability
// 1 - recognition_failure and reported with Gaussian pose noise.
std::vector<SceneObject> recognize(const Scene& scene, const SimConfig& cfg, Rng& rng);

// Two top-down grasps on the centres of opposing vertical faces, one per face
// pair, in face-pair order. Throws std::invalid_argument for non-blocks.
std::vector<GraspCandidate> plan_block_grasps(const SceneObject& obj);

// n top-down diametral grasps at mid-height, azimuths yaw + k*pi/n.
std::vector<GraspCandidate> plan_cylinder_grasps(const SceneObject& obj, int n);

std::vector<GraspCandidate> plan_grasps(const SceneObject& obj, const SimConfig& cfg);

Vec3 standoff_point(const GraspCandidate& g, const SimConfig& cfg);

// Reachable iff the aperture fits the gripper, both contacts and the standoff
// point are inside the workspace, and no other object's bounding cylinder
// blocks the vertical corridor above either finger or the palm centre.
Reachability check_reachability(const GraspCandidate& g, const SimConfig& cfg, const Scene& scene);

struct ExecutionPlan {
  int grasp_id = 0;
  int object_id = 0;
  PhaseArray durations{};
  double standoff = 0.0;
  double lift_height = 0.0;
  Pose place_pose;
};

ExecutionPlan make_plan(const GraspCandidate& g, const SimConfig& cfg, const Pose& place_pose);

// ---- world events -------------------------------------------------------

struct RecognitionDone {
  std::vector<SceneObject> objects;
};
struct RecognitionFailed {};
struct GraspsPlanned {
  int object_id = 0;
  std::vector<GraspCandidate> grasps;  // all Pending
};
struct ReachabilityComputed {
  int grasp_id = 0;
  Reachability reachability = Reachability::Pending;
};
struct ExecutionProgress {
  ExecPhase phase = ExecPhase::Approach;
  int step = 0;         // steps completed in this phase
  int phase_steps = 0;  // steps in this phase
  double fraction() const { return static_cast<double>(step) / phase_steps; }
};
struct ExecutionDone {
  int object_id = 0;
  bool success = false;
  std::optional<ExecPhase> failed_phase;
};

using WorldEvent = std::variant<RecognitionDone, RecognitionFailed, GraspsPlanned,
                                ReachabilityComputed, ExecutionProgress, ExecutionDone>;

nlohmann::json to_json(const WorldEvent& ev);

// Steps one execution through Approach -> Grasp -> Lift -> Place. Phase
// failures are drawn once, up front, so pausing never changes the outcome.
class Execution {
 public:
  Execution(const ExecutionPlan& plan, const SimConfig& cfg, const std::string& object_label, Rng rng);

  // Advances one step unless halted or finished. Returns the progress event
  // and, on the phase boundary that ends the run, the terminal event.
  std::vector<WorldEvent> step();

  // Halting right before the final release step is deferred: that step still
  // runs and the execution finishes.
  void halt();
  void resume();

  bool halted() const { return halted_; }
  bool finished() const { return finished_; }
  bool halt_deferred() const { return halt_deferred_; }
  ExecPhase phase() const { return static_cast<ExecPhase>(phase_); }
  int phase_steps(ExecPhase phase) const { return steps_[static_cast<std::size_t>(phase)]; }
  const ExecutionPlan& plan() const { return plan_; }
  const std::array<bool, kPhaseCount>& planned_failures() const { return fails_; }

 private:
  bool at_final_step() const;

  ExecutionPlan plan_;
  std::array<int, kPhaseCount> steps_{};
  std::array<bool, kPhaseCount> fails_{};
  std::size_t phase_ = 0;
  int done_in_phase_ = 0;
  bool halted_ = false;
  bool halt_deferred_ = false;
  bool finished_ = false;
};

// Unpaused run to completion.
std::vector<WorldEvent> execute(const ExecutionPlan& plan, const SimConfig& cfg,
                                const std::string& object_label, Rng rng);

// Owns the scene and the simulation clock. Time advances only through step().
class World {
 public:
  World(Scene scene, SimConfig cfg);

  const Scene& scene() const { return scene_; }
  const SimConfig& config() const { return cfg_; }
  std::uint64_t ticks() const { return ticks_; }
  double now() const { return static_cast<double>(ticks_) * cfg_.dt; }

  // Advances the clock by one dt and every active job with it.
  std::vector<WorldEvent> step();
  // Steps until now() >= t (within rounding); returns every event produced.
  std::vector<WorldEvent> advance_to(double t);

  // Completes recognition_duration seconds later.
  void request_recognition();
  bool recognition_pending() const { return recognition_due_.has_value(); }

  // Immediate: GraspsPlanned followed by one ReachabilityComputed per grasp.
  // Grasps are planned on the last detected pose of the object.
  std::vector<WorldEvent> request_grasps(int object_id);

  // Throws ProtocolViolation unless the grasp was planned and is Reachable,
  // or an execution is already running.
  void start_execution(int grasp_id);
  void halt();
  void resume();
  void abort();

  const Execution* execution() const { return execution_ ? &*execution_ : nullptr; }

 private:
  Pose next_place_pose() const;

  Scene scene_;
  SimConfig cfg_;
  std::uint64_t ticks_ = 0;
  std::optional<std::uint64_t> recognition_due_;
  std::uint64_t recognition_calls_ = 0;
  std::uint64_t execution_calls_ = 0;
  std::vector<SceneObject> detected_;
  std::vector<GraspCandidate> grasps_;
  int next_grasp_id_ = 0;
  std::optional<Execution> execution_;
  std::optional<Pose> execution_place_;
};

}  // namespace hitl::sim
