#include "hitl/service/session.hpp"

#include "hitl/errors.hpp"

namespace hitl::service {

using nlohmann::json;

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr double kTickEps = 1e-9;

}  // namespace

Session::Session(SessionConfig cfg)
    : cfg_(std::move(cfg)), world_(cfg_.scene, cfg_.sim), adapter_(make_adapter(cfg_.device, cfg_.emg)) {
  trace_.append({{"kind", "header"},
                 {"version", kTraceVersion},
                 {"scene_file", cfg_.scene_file},
                 {"config", to_json(cfg_)},
                 {"config_hash", config_hash(cfg_)}});
}

void Session::start() {
  if (started_) throw ProtocolViolation("session already started");
  started_ = true;
  dispatch(0.0, pipeline_.start());
  maybe_snapshot(0.0);
}

void Session::advance_to(double t) {
  if (!started_) throw ProtocolViolation("session not started");
  const double dt = world_.config().dt;
  while (static_cast<double>(world_.ticks() + 1) * dt <= t + kTickEps) {
    auto events = world_.step();
    const double tick_t = world_.now();
    now_ = std::max(now_, tick_t);
    adapter_->tick(tick_t);
    on_world_events(tick_t, events);
    maybe_snapshot(tick_t);
  }
  now_ = std::max(now_, t);
}

void Session::input(double t, const DeviceInput& in, std::optional<double> client_t) {
  if (finished_) throw InputError("session has ended");
  if (t < now_) throw InputError("input at t=" + std::to_string(t) + " precedes session time");
  advance_to(t);
  json rec{{"t", t}, {"kind", "input"}, {"input", to_json(in)}};
  if (client_t) rec["client_t"] = *client_t;
  trace_.append(rec);
  auto result = adapter_->on_input(in, t, pipeline_.buttons());
  if (!result.rejected.empty()) record(t, "rejected", "reason", result.rejected);
  for (const auto& cmd : result.commands) {
    json c{{"cmd", command_name(cmd.kind)}, {"source", device_name(cmd.source)}};
    c["button"] = cmd.button ? json(button_key(*cmd.button)) : json(nullptr);
    record(t, "command", "command", std::move(c));
    auto outcome = pipeline_.apply(cmd);
    if (!outcome.note.empty()) record(t, "ignored", "reason", outcome.note);
    dispatch(t, outcome.requests);
  }
  maybe_snapshot(t);
}

void Session::finish(double t, bool complete) {
  if (finished_) throw ProtocolViolation("session already finished");
  advance_to(t);
  maybe_snapshot(t);
  record(t, "end", "complete", complete);
  finished_ = true;
  complete_ = complete;
}

json Session::snapshot() const {
  json body = last_body_;
  body["t"] = last_snapshot_t_;
  return body;
}

void Session::record(double t, const char* kind, const char* key, json body) {
  json rec{{"t", t}, {"kind", kind}};
  rec[key] = std::move(body);
  trace_.append(rec);
}

void Session::dispatch(double t, const std::vector<pipeline::EngineRequest>& requests) {
  for (const auto& request : requests) {
    record(t, "request", "request", pipeline::to_json(request));
    std::visit(Overloaded{
                   [&](const pipeline::RequestRecognition&) { world_.request_recognition(); },
                   [&](const pipeline::RequestGrasps& r) { on_world_events(t, world_.request_grasps(r.object_id)); },
                   [&](const pipeline::StartExecution& r) { world_.start_execution(r.grasp_id); },
                   [&](const pipeline::HaltExecution&) { world_.halt(); },
                   [&](const pipeline::ResumeExecution&) { world_.resume(); },
                   [&](const pipeline::AbortExecution&) { world_.abort(); },
               },
               request);
  }
}

void Session::on_world_events(double t, const std::vector<sim::WorldEvent>& events) {
  for (const auto& ev : events) {
    if (!std::holds_alternative<sim::ExecutionProgress>(ev)) record(t, "event", "event", sim::to_json(ev));
    auto outcome = pipeline_.on_engine_event(ev, t);
    if (const auto* done = std::get_if<sim::ExecutionDone>(&ev)) {
      const auto& trial = pipeline_.context().trials.back();
      json o{{"object", trial.label}, {"object_id", done->object_id}, {"success", done->success}};
      o["failed_phase"] = done->failed_phase ? json(sim::phase_name(*done->failed_phase)) : json(nullptr);
      record(t, "outcome", "outcome", std::move(o));
    }
    dispatch(t, outcome.requests);
  }
}

void Session::maybe_snapshot(double t) {
  json body = pipeline_.snapshot();
  body["device"] = adapter_->status();
  if (body == last_body_) return;
  last_body_ = std::move(body);
  last_snapshot_t_ = t;
  record(t, "snapshot", "snapshot", last_body_);
  if (observer_) observer_(snapshot());
}

}  // namespace hitl::service
