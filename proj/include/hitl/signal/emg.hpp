#pragma once

// Single-channel sEMG control: RMS envelope -> Rest/Medium/High level ->
// debounced Cycle/Select cursor actions, plus a rest/flex calibration.
//
// A medium contraction moves the cursor (Cycle), a strong one selects. The
// debounce rules:
//   - Cycle fires once Medium has been held continuously for `dwell`.
//   - Select fires on the first High frame.
//   - An episode is a maximal run of non-Rest frames. At most one action per
//     episode, and an episode can only fire if the level returned to Rest
//     after the previous action and `refractory` seconds had elapsed since
//     that action when the episode began.
// A strong flex that passes through the medium band faster than `dwell`
// therefore yields a Select and never a Cycle.

#include "hitl/signal/frame.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hitl::signal {

enum class SignalLevel { Rest = 0, Medium = 1, High = 2 };

std::string_view level_name(SignalLevel level);

struct CalibrationConfig {
  double gain = 1.0;
  double low_threshold = 0.2;   // gained power needed for Medium
  double high_threshold = 0.6;  // gained power needed for High
  double rms_window = 0.2;      // seconds
  double dwell = 0.15;          // seconds of Medium before a Cycle
  double refractory = 0.5;      // seconds after an action
  double hysteresis_ratio = 0.1;

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  friend bool operator==(const CalibrationConfig&, const CalibrationConfig&) = default;
};

enum class CursorActionKind { None, Cycle, Select };

std::string_view action_name(CursorActionKind kind);

struct CursorAction {
  CursorActionKind kind = CursorActionKind::None;
  double t = 0.0;

  friend bool operator==(const CursorAction&, const CursorAction&) = default;
};

struct TimedLevel {
  double t = 0.0;
  SignalLevel level = SignalLevel::Rest;
};

// RMS of the values whose timestamps lie in (at - window, at]; 0 when that
// interval holds no samples. Frames must be sorted by time.
double rms_window(std::span<const EmgFrame> frames, double window, double at);

// rms_window evaluated at every frame's own timestamp.
std::vector<double> rms_envelope(std::span<const EmgFrame> frames, double window);

// Level for gained power p = gain * power. Rising edges use the thresholds
// as-is; staying at or above a level the signal already holds only needs
// threshold * (1 - hysteresis_ratio).
SignalLevel classify_level(double power, SignalLevel prev, const CalibrationConfig& cfg);

std::vector<TimedLevel> classify_levels(std::span<const EmgFrame> frames,
                                        const CalibrationConfig& cfg);

// Incremental form of emit_actions. Throws InputError on non-increasing time.
class ActionEmitter {
 public:
  explicit ActionEmitter(const CalibrationConfig& cfg) : cfg_(cfg) {}

  std::optional<CursorAction> push(const TimedLevel& sample);

 private:
  CalibrationConfig cfg_;
  std::optional<double> last_t_;
  bool acted_ = false;
  double last_action_t_ = 0.0;
  bool rest_since_action_ = true;
  bool in_episode_ = false;
  bool episode_eligible_ = false;
  bool episode_fired_ = false;
  bool in_medium_ = false;
  double medium_since_ = 0.0;
};

std::vector<CursorAction> emit_actions(std::span<const TimedLevel> levels,
                                       const CalibrationConfig& cfg);

// Streaming frame -> action path used by live sessions. Keeps only the frames
// inside the current RMS window.
class EmgClassifier {
 public:
  struct Output {
    double power = 0.0;  // ungained RMS
    SignalLevel level = SignalLevel::Rest;
    std::optional<CursorAction> action;
  };

  explicit EmgClassifier(const CalibrationConfig& cfg);

  Output push(const EmgFrame& frame);

  const CalibrationConfig& config() const { return cfg_; }
  SignalLevel level() const { return level_; }

 private:
  CalibrationConfig cfg_;
  std::vector<EmgFrame> window_;
  std::size_t head_ = 0;
  SignalLevel level_ = SignalLevel::Rest;
  ActionEmitter emitter_;
};

// Batch frames -> actions; identical to feeding an EmgClassifier.
std::vector<CursorAction> process_frames(std::span<const EmgFrame> frames,
                                         const CalibrationConfig& cfg);

// Places the thresholds between the rest and flex power distributions:
//   low  = rest_p95 + 0.25 * (flex_median - rest_p95)
//   high = rest_p95 + 0.70 * (flex_median - rest_p95)
// in raw power, then scales everything by gain = 1 / flex_median so that a
// typical flex reads 1.0. Only full windows contribute. Timing fields are
// taken from `base`. Throws InputError if a recording spans less than two
// windows, CalibrationFailed if flex_median <= rest_p95.
CalibrationConfig calibrate(std::span<const EmgFrame> rest_frames,
                            std::span<const EmgFrame> flex_frames,
                            const CalibrationConfig& base = {});

// Linearly interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Line-delimited {"t":..,"v":..} records. Validates strict time order.
std::vector<EmgFrame> read_frames(std::istream& in);
void write_actions(std::ostream& out, std::span<const CursorAction> actions);

}  // namespace hitl::signal
