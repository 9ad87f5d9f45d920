#pragma once

// Single assistive switch, two inputs by hold duration d (press -> release):
//
//   d <  0.1 s        too quick, ignored
//   0.1 <= d < 1.0 s  NEXT (Cycle)
//   1.0 <= d <= 3.0 s Select
//   d >  3.0 s        expired, ignored
//
// Display messages follow the hold: "Going to send NEXT" after the press,
// "Going to send Select" once held for 1 s, back to "Waiting for user input"
// after 3 s. classify_hold() is the single source of truth for the bounds;
// tick() only changes what is displayed, never the command.

#include "hitl/menu_command.hpp"

#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace hitl::switch_proto {

inline constexpr double kMinHold = 0.1;
inline constexpr double kSelectHold = 1.0;
inline constexpr double kMaxHold = 3.0;

inline constexpr std::string_view kMsgWaiting = "Waiting for user input";
inline constexpr std::string_view kMsgNext = "Going to send NEXT";
inline constexpr std::string_view kMsgSelect = "Going to send Select";

enum class EventKind { Press, Release };

struct SwitchEvent {
  double t = 0.0;
  EventKind kind = EventKind::Press;
};

enum class Phase { Waiting, ArmedNext, ArmedSelect, Expired };

struct SwitchState {
  Phase phase = Phase::Waiting;
  double press_time = 0.0;  // meaningful unless Waiting

  bool pressed() const { return phase != Phase::Waiting; }
  friend bool operator==(const SwitchState&, const SwitchState&) = default;
};

std::optional<CommandKind> classify_hold(double held);

// Throws ProtocolViolation on Press while pressed or Release while released,
// and InputError if the event predates the press.
std::pair<SwitchState, std::optional<CommandKind>> on_event(const SwitchState& state,
                                                            const SwitchEvent& event);

// Latches ArmedNext -> ArmedSelect -> Expired as the hold grows.
std::pair<SwitchState, std::string_view> tick(const SwitchState& state, double now);

std::string_view message(const SwitchState& state);
std::string_view phase_name(Phase phase);

// Line-delimited {"t":..,"kind":"press"|"release"} records, time-ordered.
std::vector<SwitchEvent> read_events(std::istream& in);

}  // namespace hitl::switch_proto
