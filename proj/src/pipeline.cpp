#include "hitl/pipeline.hpp"

#include "hitl/errors.hpp"

namespace hitl::pipeline {

using nlohmann::json;

std::string_view state_name(PipelineState s) {
  switch (s) {
    case PipelineState::ObjectRecognition: return "ObjectRecognition";
    case PipelineState::ObjectSelection: return "ObjectSelection";
    case PipelineState::GraspSelection: return "GraspSelection";
    case PipelineState::GraspExecution: return "GraspExecution";
    case PipelineState::PausedExecution: return "PausedExecution";
  }
  return "?";
}

int stage_index(PipelineState s) { return static_cast<int>(s); }

bool accepts_input(PipelineState s) { return s != PipelineState::ObjectRecognition; }

const sim::SceneObject* SessionContext::highlighted_object() const {
  return objects.empty() ? nullptr : &objects[object_highlight];
}

const sim::GraspCandidate* SessionContext::highlighted_grasp() const {
  return grasps.empty() ? nullptr : &grasps[grasp_highlight];
}

ButtonSet buttons_for(PipelineState state, const SessionContext&) {
  auto make = [](std::initializer_list<ButtonId> ids) {
    std::vector<Button> out;
    for (ButtonId id : ids) out.push_back({id, std::string(button_label(id))});
    return ButtonSet(std::move(out));
  };
  switch (state) {
    case PipelineState::ObjectRecognition: return ButtonSet{};
    case PipelineState::ObjectSelection:
      return make({ButtonId::SelectObject, ButtonId::NextObject, ButtonId::RerunVision});
    case PipelineState::GraspSelection:
      return make({ButtonId::SelectGrasp, ButtonId::NextGrasp, ButtonId::Back});
    case PipelineState::GraspExecution: return make({ButtonId::Pause});
    case PipelineState::PausedExecution: return make({ButtonId::Restart, ButtonId::Continue});
  }
  return ButtonSet{};
}

bool is_arm_motion(const EngineRequest& r) {
  return std::holds_alternative<StartExecution>(r) || std::holds_alternative<ResumeExecution>(r);
}

json to_json(const EngineRequest& r) {
  struct Visitor {
    json operator()(const RequestRecognition&) const { return {{"type", "recognize"}}; }
    json operator()(const RequestGrasps& q) const { return {{"type", "plan_grasps"}, {"object", q.object_id}}; }
    json operator()(const StartExecution& q) const { return {{"type", "execute"}, {"grasp", q.grasp_id}}; }
    json operator()(const HaltExecution&) const { return {{"type", "halt"}}; }
    json operator()(const ResumeExecution&) const { return {{"type", "resume"}}; }
    json operator()(const AbortExecution&) const { return {{"type", "abort"}}; }
  };
  return std::visit(Visitor{}, r);
}

Pipeline::Pipeline() { enter(PipelineState::ObjectRecognition); }

std::vector<EngineRequest> Pipeline::start() { return {RequestRecognition{}}; }

void Pipeline::enter(PipelineState next) {
  state_ = next;
  ctx_.object_highlight = 0;
  ctx_.grasp_highlight = 0;
  switch (next) {
    case PipelineState::ObjectRecognition:
      ctx_.objects.clear();
      ctx_.selected_object.reset();
      ctx_.grasps.clear();
      ctx_.executing_grasp.reset();
      ctx_.progress.reset();
      break;
    case PipelineState::ObjectSelection:
      ctx_.selected_object.reset();
      ctx_.grasps.clear();
      break;
    case PipelineState::GraspSelection:
      ctx_.grasps.clear();
      break;
    case PipelineState::GraspExecution:
    case PipelineState::PausedExecution:
      break;
  }
  buttons_ = buttons_for(next, ctx_);
}

Outcome Pipeline::apply(const MenuCommand& cmd) {
  if (last_command_t_ && cmd.t < *last_command_t_) {
    throw InputError("menu commands must arrive in time order");
  }
  last_command_t_ = cmd.t;

  if (!accepts_input(state_)) return {{}, false, "input locked during object recognition"};

  if (cmd.kind == CommandKind::Cycle) {
    buttons_.cycle();
    return {};
  }
  if (cmd.button) {
    if (!buttons_.contains(*cmd.button)) return {{}, false, "button not available in this stage"};
    return activate(*cmd.button);
  }
  return activate(*buttons_.highlighted());
}

Outcome Pipeline::activate(ButtonId id) {
  Outcome out;
  switch (id) {
    case ButtonId::SelectObject: {
      const sim::SceneObject* obj = ctx_.highlighted_object();
      if (!obj) return {{}, false, "no object to select"};
      const int object_id = obj->id;
      enter(PipelineState::GraspSelection);
      ctx_.selected_object = object_id;
      out.requests.push_back(RequestGrasps{object_id});
      break;
    }
    case ButtonId::NextObject:
      if (ctx_.objects.empty()) return {{}, false, "no objects detected"};
      ctx_.object_highlight = (ctx_.object_highlight + 1) % ctx_.objects.size();
      return out;
    case ButtonId::RerunVision:
      enter(PipelineState::ObjectRecognition);
      out.requests.push_back(RequestRecognition{});
      break;
    case ButtonId::SelectGrasp: {
      const sim::GraspCandidate* g = ctx_.highlighted_grasp();
      if (!g) return {{}, false, "no grasp to select"};
      if (g->reachability != sim::Reachability::Reachable) {
        return {{}, false, "highlighted grasp is not reachable"};
      }
      const int grasp_id = g->id;
      enter(PipelineState::GraspExecution);
      ctx_.executing_grasp = grasp_id;
      ctx_.progress = Progress{};
      out.requests.push_back(StartExecution{grasp_id});
      break;
    }
    case ButtonId::NextGrasp:
      if (ctx_.grasps.empty()) return {{}, false, "no grasps planned"};
      ctx_.grasp_highlight = (ctx_.grasp_highlight + 1) % ctx_.grasps.size();
      return out;
    case ButtonId::Back:
      enter(PipelineState::ObjectSelection);
      break;
    case ButtonId::Pause:
      enter(PipelineState::PausedExecution);
      out.requests.push_back(HaltExecution{});
      break;
    case ButtonId::Restart:
      enter(PipelineState::ObjectRecognition);
      out.requests.push_back(AbortExecution{});
      out.requests.push_back(RequestRecognition{});
      break;
    case ButtonId::Continue:
      enter(PipelineState::GraspExecution);
      out.requests.push_back(ResumeExecution{});
      break;
  }
  out.transitioned = true;
  return out;
}

Outcome Pipeline::on_engine_event(const sim::WorldEvent& ev, double t) {
  auto require = [this](bool ok, const char* what) {
    if (!ok) {
      throw ProtocolViolation(std::string(what) + " in state " + std::string(state_name(state_)));
    }
  };
  const bool executing =
      state_ == PipelineState::GraspExecution || state_ == PipelineState::PausedExecution;

  Outcome out;
  if (const auto* e = std::get_if<sim::RecognitionDone>(&ev)) {
    require(state_ == PipelineState::ObjectRecognition, "recognition result");
    enter(PipelineState::ObjectSelection);
    ctx_.objects = e->objects;
    out.transitioned = true;
  } else if (std::holds_alternative<sim::RecognitionFailed>(ev)) {
    require(state_ == PipelineState::ObjectRecognition, "recognition failure");
    enter(PipelineState::ObjectSelection);
    out.transitioned = true;
  } else if (const auto* e = std::get_if<sim::GraspsPlanned>(&ev)) {
    require(state_ == PipelineState::GraspSelection && ctx_.selected_object == e->object_id,
            "grasps for an unselected object");
    ctx_.grasps = e->grasps;
    ctx_.grasp_highlight = 0;
  } else if (const auto* e = std::get_if<sim::ReachabilityComputed>(&ev)) {
    require(state_ == PipelineState::GraspSelection, "reachability result");
    bool found = false;
    for (sim::GraspCandidate& g : ctx_.grasps) {
      if (g.id == e->grasp_id) {
        g.reachability = e->reachability;
        found = true;
      }
    }
    require(found, "reachability for an unknown grasp");
  } else if (const auto* e = std::get_if<sim::ExecutionProgress>(&ev)) {
    require(executing, "execution progress");
    ctx_.progress = Progress{e->phase, e->step, e->phase_steps};
  } else if (const auto* e = std::get_if<sim::ExecutionDone>(&ev)) {
    require(executing, "execution result");
    std::string label;
    for (const sim::SceneObject& o : ctx_.objects) {
      if (o.id == e->object_id) label = o.label;
    }
    ctx_.trials.push_back({t, e->object_id, label, e->success, e->failed_phase});
    enter(PipelineState::ObjectRecognition);
    out.requests.push_back(RequestRecognition{});
    out.transitioned = true;
  }
  return out;
}

json Pipeline::snapshot() const {
  json buttons = json::array();
  for (const Button& b : buttons_.buttons()) {
    buttons.push_back({{"id", button_key(b.id)}, {"label", b.label}});
  }
  json objects = json::array();
  for (std::size_t i = 0; i < ctx_.objects.size(); ++i) {
    const sim::SceneObject& o = ctx_.objects[i];
    objects.push_back({{"id", o.id},
                       {"label", o.label},
                       {"shape", sim::shape_name(o.shape)},
                       {"x", o.pose.position.x},
                       {"y", o.pose.position.y},
                       {"yaw", o.pose.yaw},
                       {"highlighted", i == ctx_.object_highlight}});
  }
  json grasps = json::array();
  for (std::size_t i = 0; i < ctx_.grasps.size(); ++i) {
    const sim::GraspCandidate& g = ctx_.grasps[i];
    grasps.push_back({{"id", g.id},
                      {"label", g.label},
                      {"aperture_mm", g.aperture},
                      {"reachability", sim::reachability_name(g.reachability)},
                      {"highlighted", i == ctx_.grasp_highlight}});
  }
  json progress = nullptr;
  if (ctx_.progress) {
    progress = {{"phase", sim::phase_name(ctx_.progress->phase)},
                {"step", ctx_.progress->step},
                {"of", ctx_.progress->phase_steps}};
  }
  return {{"state", state_name(state_)},
          {"stage", stage_index(state_)},
          {"buttons", std::move(buttons)},
          {"highlight", buttons_.empty() ? json(nullptr) : json(buttons_.highlight())},
          {"objects", std::move(objects)},
          {"selected_object", ctx_.selected_object ? json(*ctx_.selected_object) : json(nullptr)},
          {"grasps", std::move(grasps)},
          {"progress", std::move(progress)},
          {"trials", ctx_.trials.size()}};
}

}  // namespace hitl::pipeline
