#include "hitl/service/adapters.hpp"

#include "hitl/errors.hpp"
#include "hitl/voice_proto.hpp"

#include <cmath>

namespace hitl::service {

using nlohmann::json;

namespace {

std::string_view kind_name(DeviceInput::Kind k) {
  switch (k) {
    case DeviceInput::Kind::Cycle: return "cycle";
    case DeviceInput::Kind::Select: return "select";
    case DeviceInput::Kind::Press: return "press";
    case DeviceInput::Kind::Release: return "release";
    case DeviceInput::Kind::Utterance: return "utterance";
    case DeviceInput::Kind::Frame: return "frame";
  }
  return "?";
}

AdapterResult reject(std::string why) { return {{}, std::move(why)}; }

}  // namespace

json to_json(const DeviceInput& in) {
  json j{{"type", kind_name(in.kind)}};
  if (in.kind == DeviceInput::Kind::Frame) j["v"] = in.v;
  if (in.kind == DeviceInput::Kind::Utterance) j["text"] = in.text;
  return j;
}

DeviceInput device_input_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw InputError("device event needs a string 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "cycle") return DeviceInput::cycle();
  if (type == "select") return DeviceInput::select();
  if (type == "press") return DeviceInput::press();
  if (type == "release") return DeviceInput::release();
  if (type == "utterance") {
    if (!j.contains("text") || !j["text"].is_string()) throw InputError("utterance needs 'text'");
    return DeviceInput::utterance(j["text"].get<std::string>());
  }
  if (type == "frame") {
    if (!j.contains("v") || !j["v"].is_number()) throw InputError("frame needs numeric 'v'");
    return DeviceInput::frame(j["v"].get<double>());
  }
  throw InputError("unknown device event type '" + type + "'");
}

AdapterResult DirectAdapter::on_input(const DeviceInput& in, double t, const ButtonSet&) {
  if (in.kind == DeviceInput::Kind::Cycle) return {{MenuCommand{CommandKind::Cycle, t, label_, {}}}, {}};
  if (in.kind == DeviceInput::Kind::Select) return {{MenuCommand{CommandKind::Select, t, label_, {}}}, {}};
  return reject("device accepts only cycle/select");
}

AdapterResult SwitchAdapter::on_input(const DeviceInput& in, double t, const ButtonSet&) {
  if (in.kind != DeviceInput::Kind::Press && in.kind != DeviceInput::Kind::Release) {
    return reject("switch accepts only press/release");
  }
  const auto kind = in.kind == DeviceInput::Kind::Press ? switch_proto::EventKind::Press
                                                        : switch_proto::EventKind::Release;
  try {
    auto [next, cmd] = switch_proto::on_event(state_, {t, kind});
    state_ = next;
    if (!cmd) return {};
    return {{MenuCommand{*cmd, t, Device::Switch, {}}}, {}};
  } catch (const ProtocolViolation& e) {
    return reject(e.what());
  }
}

void SwitchAdapter::tick(double now) {
  if (state_.pressed()) state_ = switch_proto::tick(state_, now).first;
}

json SwitchAdapter::status() const {
  return {{"message", switch_proto::message(state_)}, {"phase", switch_proto::phase_name(state_.phase)}};
}

AdapterResult VoiceAdapter::on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) {
  if (in.kind != DeviceInput::Kind::Utterance) return reject("voice accepts only utterances");
  try {
    last_phrase_ = voice_proto::parse_utterance({t, in.text});
    // Nothing is on screen while recognition runs; the pipeline drops it.
    if (on_screen.empty()) return {{MenuCommand{CommandKind::Select, t, Device::Voice, {}}}, {}};
    const ButtonId id = voice_proto::resolve_command(last_phrase_, on_screen);
    return {{MenuCommand{CommandKind::Select, t, Device::Voice, id}}, {}};
  } catch (const voice_proto::VoiceError& e) {
    return reject(e.what());
  }
}

json VoiceAdapter::status() const { return {{"last_phrase", last_phrase_}}; }

AdapterResult SemgAdapter::on_input(const DeviceInput& in, double t, const ButtonSet&) {
  if (in.kind != DeviceInput::Kind::Frame) return reject("sEMG accepts only frames");
  try {
    auto out = classifier_.push({t, in.v});
    power_ = out.power;
    if (!out.action) return {};
    const CommandKind kind =
        out.action->kind == signal::CursorActionKind::Select ? CommandKind::Select : CommandKind::Cycle;
    return {{MenuCommand{kind, t, Device::Semg, {}}}, {}};
  } catch (const InputError& e) {
    return reject(e.what());
  }
}

json SemgAdapter::status() const {
  const auto& cfg = classifier_.config();
  // Quantized so snapshots change with the bar, not with every sample.
  const double bar = std::round(cfg.gain * power_ * 20.0) / 20.0;
  return {{"level", signal::level_name(classifier_.level())},
          {"power", bar},
          {"low", cfg.low_threshold},
          {"high", cfg.high_threshold}};
}

std::unique_ptr<DeviceAdapter> make_adapter(Device device, const signal::CalibrationConfig& emg) {
  switch (device) {
    case Device::Mouse:
    case Device::Direct: return std::make_unique<DirectAdapter>(device);
    case Device::Switch: return std::make_unique<SwitchAdapter>();
    case Device::Voice: return std::make_unique<VoiceAdapter>();
    case Device::Semg: return std::make_unique<SemgAdapter>(emg);
  }
  return nullptr;
}

}  // namespace hitl::service
