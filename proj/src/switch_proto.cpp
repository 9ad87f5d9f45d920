#include "hitl/switch_proto.hpp"

#include "hitl/errors.hpp"
#include "hitl/jsonl.hpp"

#include <istream>
#include <string>

namespace hitl::switch_proto {

std::optional<CommandKind> classify_hold(double held) {
  if (held < kMinHold) return std::nullopt;
  if (held < kSelectHold) return CommandKind::Cycle;
  if (held <= kMaxHold) return CommandKind::Select;
  return std::nullopt;
}

std::pair<SwitchState, std::optional<CommandKind>> on_event(const SwitchState& state,
                                                            const SwitchEvent& event) {
  if (event.kind == EventKind::Press) {
    if (state.pressed()) throw ProtocolViolation("switch pressed while already pressed");
    return {SwitchState{Phase::ArmedNext, event.t}, std::nullopt};
  }
  if (!state.pressed()) throw ProtocolViolation("switch released while not pressed");
  if (event.t < state.press_time) throw InputError("switch release precedes its press");
  if (state.phase == Phase::Expired) return {SwitchState{}, std::nullopt};
  // Expiry is re-derived from the duration when no tick latched it.
  return {SwitchState{}, classify_hold(event.t - state.press_time)};
}

std::pair<SwitchState, std::string_view> tick(const SwitchState& state, double now) {
  SwitchState next = state;
  const double held = now - state.press_time;
  if (next.phase == Phase::ArmedNext && held >= kSelectHold) next.phase = Phase::ArmedSelect;
  if (next.phase == Phase::ArmedSelect && held > kMaxHold) next.phase = Phase::Expired;
  return {next, message(next)};
}

std::string_view message(const SwitchState& state) {
  switch (state.phase) {
    case Phase::ArmedNext: return kMsgNext;
    case Phase::ArmedSelect: return kMsgSelect;
    case Phase::Waiting:
    case Phase::Expired: return kMsgWaiting;
  }
  return kMsgWaiting;
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Waiting: return "waiting";
    case Phase::ArmedNext: return "armed_next";
    case Phase::ArmedSelect: return "armed_select";
    case Phase::Expired: return "expired";
  }
  return "?";
}

std::vector<SwitchEvent> read_events(std::istream& in) {
  std::vector<SwitchEvent> out;
  for (const jsonl::Line& line : jsonl::read(in)) {
    const double t = jsonl::number_field(line, "t");
    const std::string kind = jsonl::string_field(line, "kind");
    if (kind != "press" && kind != "release") {
      throw InputError("line " + std::to_string(line.number) + ": kind must be press or release");
    }
    if (!out.empty() && t < out.back().t) {
      throw InputError("line " + std::to_string(line.number) + ": timestamps must not decrease");
    }
    out.push_back({t, kind == "press" ? EventKind::Press : EventKind::Release});
  }
  return out;
}

}  // namespace hitl::switch_proto
