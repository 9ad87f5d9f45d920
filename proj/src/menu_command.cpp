#include "hitl/menu_command.hpp"

#include <stdexcept>
#include <string>

namespace hitl {

std::string_view command_name(CommandKind kind) {
  return kind == CommandKind::Cycle ? "cycle" : "select";
}

std::string_view device_name(Device device) {
  switch (device) {
    case Device::Mouse: return "mouse";
    case Device::Semg: return "semg";
    case Device::Switch: return "switch";
    case Device::Voice: return "voice";
    case Device::Direct: return "direct";
  }
  return "?";
}

Device parse_device(std::string_view name) {
  if (name == "mouse") return Device::Mouse;
  if (name == "semg") return Device::Semg;
  if (name == "switch") return Device::Switch;
  if (name == "voice" || name == "alexa") return Device::Voice;
  if (name == "direct") return Device::Direct;
  throw std::invalid_argument("unknown device '" + std::string(name) + "'");
}

std::string_view button_label(ButtonId id) {
  switch (id) {
    case ButtonId::SelectObject: return "Select Object";
    case ButtonId::NextObject: return "Next Object";
    case ButtonId::RerunVision: return "Rerun Vision";
    case ButtonId::SelectGrasp: return "Select Grasp";
    case ButtonId::NextGrasp: return "Next Grasp";
    case ButtonId::Back: return "Back";
    case ButtonId::Pause: return "Pause";
    case ButtonId::Restart: return "Restart";
    case ButtonId::Continue: return "Continue";
  }
  return "?";
}

std::string_view button_key(ButtonId id) {
  switch (id) {
    case ButtonId::SelectObject: return "select_object";
    case ButtonId::NextObject: return "next_object";
    case ButtonId::RerunVision: return "rerun_vision";
    case ButtonId::SelectGrasp: return "select_grasp";
    case ButtonId::NextGrasp: return "next_grasp";
    case ButtonId::Back: return "back";
    case ButtonId::Pause: return "pause";
    case ButtonId::Restart: return "restart";
    case ButtonId::Continue: return "continue";
  }
  return "?";
}

}  // namespace hitl
