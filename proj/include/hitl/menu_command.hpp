#pragma once

// The two-command vocabulary every input device reduces to.

#include <optional>
#include <string>
#include <string_view>

namespace hitl {

enum class CommandKind { Cycle, Select };

enum class Device { Mouse, Semg, Switch, Voice, Direct };

std::string_view command_name(CommandKind kind);
std::string_view device_name(Device device);
// Accepts the names above plus "alexa" for voice. Throws std::invalid_argument.
Device parse_device(std::string_view name);

enum class ButtonId {
  SelectObject,
  NextObject,
  RerunVision,
  SelectGrasp,
  NextGrasp,
  Back,
  Pause,
  Restart,
  Continue,
};

std::string_view button_label(ButtonId id);
std::string_view button_key(ButtonId id);  // snake_case, used on the wire

struct MenuCommand {
  CommandKind kind = CommandKind::Cycle;
  double t = 0.0;
  Device source = Device::Direct;
  // Set by voice: a Select that targets this button instead of the highlight.
  std::optional<ButtonId> button;

  friend bool operator==(const MenuCommand&, const MenuCommand&) = default;
};

}  // namespace hitl
