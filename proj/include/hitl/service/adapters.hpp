#pragma once

// Device adapters reduce raw device input to MenuCommands.

#include "hitl/button_set.hpp"
#include "hitl/menu_command.hpp"
#include "hitl/signal/emg.hpp"
#include "hitl/switch_proto.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace hitl::service {

// One raw event from an input device.
struct DeviceInput {
  enum class Kind { Cycle, Select, Press, Release, Utterance, Frame };
  Kind kind = Kind::Cycle;
  double v = 0.0;    // Frame amplitude
  std::string text;  // Utterance transcript

  static DeviceInput cycle() { return {Kind::Cycle, 0.0, {}}; }
  static DeviceInput select() { return {Kind::Select, 0.0, {}}; }
  static DeviceInput press() { return {Kind::Press, 0.0, {}}; }
  static DeviceInput release() { return {Kind::Release, 0.0, {}}; }
  static DeviceInput utterance(std::string text) { return {Kind::Utterance, 0.0, std::move(text)}; }
  static DeviceInput frame(double v) { return {Kind::Frame, v, {}}; }

  friend bool operator==(const DeviceInput&, const DeviceInput&) = default;
};

nlohmann::json to_json(const DeviceInput& in);
// Throws InputError on unknown types or missing fields.
DeviceInput device_input_from_json(const nlohmann::json& j);

struct AdapterResult {
  std::vector<MenuCommand> commands;
  std::string rejected;  // non-empty when the input was refused
};

class DeviceAdapter {
 public:
  virtual ~DeviceAdapter() = default;

  virtual Device device() const = 0;
  virtual AdapterResult on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) = 0;
  // Called on every simulation step; only time-driven displays change here.
  virtual void tick(double /*now*/) {}
  // Device panel content for snapshots (switch message, sEMG power bar).
  virtual nlohmann::json status() const { return nullptr; }
};

// Mouse or generic two-button input: Cycle/Select pass straight through.
class DirectAdapter : public DeviceAdapter {
 public:
  explicit DirectAdapter(Device label) : label_(label) {}
  Device device() const override { return label_; }
  AdapterResult on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) override;

 private:
  Device label_;
};

class SwitchAdapter : public DeviceAdapter {
 public:
  Device device() const override { return Device::Switch; }
  AdapterResult on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) override;
  void tick(double now) override;
  nlohmann::json status() const override;

  const switch_proto::SwitchState& state() const { return state_; }

 private:
  switch_proto::SwitchState state_;
};

class VoiceAdapter : public DeviceAdapter {
 public:
  Device device() const override { return Device::Voice; }
  AdapterResult on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) override;
  nlohmann::json status() const override;

 private:
  std::string last_phrase_;
};

class SemgAdapter : public DeviceAdapter {
 public:
  explicit SemgAdapter(const signal::CalibrationConfig& cfg) : classifier_(cfg) {}
  Device device() const override { return Device::Semg; }
  AdapterResult on_input(const DeviceInput& in, double t, const ButtonSet& on_screen) override;
  nlohmann::json status() const override;

 private:
  signal::EmgClassifier classifier_;
  double power_ = 0.0;
};

std::unique_ptr<DeviceAdapter> make_adapter(Device device, const signal::CalibrationConfig& emg);

}  // namespace hitl::service
