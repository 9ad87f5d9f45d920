#pragma once

// Five-stage grasp planner driven by Cycle/Select.
//
//   ObjectRecognition --RecognitionDone/Failed--> ObjectSelection
//   ObjectSelection   --Select Object--> GraspSelection
//                     --Rerun Vision---> ObjectRecognition
//   GraspSelection    --Select Grasp (reachable)--> GraspExecution
//                     --Back--> ObjectSelection
//   GraspExecution    --Pause--> PausedExecution
//                     --ExecutionDone--> ObjectRecognition
//   PausedExecution   --Continue--> GraspExecution
//                     --Restart--> ObjectRecognition
//
// ObjectRecognition accepts no input. Cycle moves the button highlight with
// wrap-around; every state entry resets all highlights to 0. Illegal or
// pointless commands are no-ops reported through Outcome::note.

#include "hitl/button_set.hpp"
#include "hitl/menu_command.hpp"
#include "hitl/sim/world.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hitl::pipeline {

enum class PipelineState {
  ObjectRecognition,
  ObjectSelection,
  GraspSelection,
  GraspExecution,
  PausedExecution,
};

inline constexpr PipelineState kAllStates[] = {
    PipelineState::ObjectRecognition, PipelineState::ObjectSelection, PipelineState::GraspSelection,
    PipelineState::GraspExecution, PipelineState::PausedExecution};

std::string_view state_name(PipelineState s);
// Position in the stage diagram shown above the scene.
int stage_index(PipelineState s);
bool accepts_input(PipelineState s);

struct Progress {
  sim::ExecPhase phase = sim::ExecPhase::Approach;
  int step = 0;
  int phase_steps = 0;
  friend bool operator==(const Progress&, const Progress&) = default;
};

struct TrialResult {
  double t = 0.0;
  int object_id = 0;
  std::string label;
  bool success = false;
  std::optional<sim::ExecPhase> failed_phase;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct SessionContext {
  std::vector<sim::SceneObject> objects;  // as detected
  std::size_t object_highlight = 0;
  std::optional<int> selected_object;
  std::vector<sim::GraspCandidate> grasps;
  std::size_t grasp_highlight = 0;
  std::optional<int> executing_grasp;
  std::optional<Progress> progress;
  std::vector<TrialResult> trials;

  const sim::SceneObject* highlighted_object() const;
  const sim::GraspCandidate* highlighted_grasp() const;
  friend bool operator==(const SessionContext&, const SessionContext&) = default;
};

ButtonSet buttons_for(PipelineState state, const SessionContext& ctx);

struct RequestRecognition {};
struct RequestGrasps {
  int object_id = 0;
};
struct StartExecution {
  int grasp_id = 0;
};
struct HaltExecution {};
struct ResumeExecution {};
struct AbortExecution {};

using EngineRequest = std::variant<RequestRecognition, RequestGrasps, StartExecution, HaltExecution,
                                   ResumeExecution, AbortExecution>;

// Requests that move the arm.
bool is_arm_motion(const EngineRequest& r);
nlohmann::json to_json(const EngineRequest& r);

struct Outcome {
  std::vector<EngineRequest> requests;
  bool transitioned = false;
  std::string note;  // why a command was ignored; empty otherwise
};

class Pipeline {
 public:
  Pipeline();

  // Kicks off the first recognition.
  std::vector<EngineRequest> start();

  PipelineState state() const { return state_; }
  const SessionContext& context() const { return ctx_; }
  const ButtonSet& buttons() const { return buttons_; }

  // Throws InputError if timestamps go backwards.
  Outcome apply(const MenuCommand& cmd);

  // Throws ProtocolViolation for events that cannot occur in the current state.
  Outcome on_engine_event(const sim::WorldEvent& ev, double t);

  nlohmann::json snapshot() const;

  friend bool operator==(const Pipeline&, const Pipeline&) = default;

 private:
  void enter(PipelineState next);
  Outcome activate(ButtonId id);

  PipelineState state_ = PipelineState::ObjectRecognition;
  SessionContext ctx_;
  ButtonSet buttons_;
  std::optional<double> last_command_t_;
};

}  // namespace hitl::pipeline
