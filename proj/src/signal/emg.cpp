#include "hitl/signal/emg.hpp"

#include "hitl/errors.hpp"
#include "hitl/jsonl.hpp"
#include "hitl/signal/simd_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hitl::signal {

namespace {

// Timestamps come from accumulated decimal steps; comparisons against window
// edges and dwell/refractory spans tolerate this much drift.
constexpr double kTimeEps = 1e-9;

double rms_of(std::span<const EmgFrame> frames) {
  if (frames.empty()) return 0.0;
  return std::sqrt(kernels::frame_sum_squares(frames) / static_cast<double>(frames.size()));
}

}  // namespace

std::string_view level_name(SignalLevel level) {
  switch (level) {
    case SignalLevel::Rest: return "rest";
    case SignalLevel::Medium: return "medium";
    case SignalLevel::High: return "high";
  }
  return "?";
}

std::string_view action_name(CursorActionKind kind) {
  switch (kind) {
    case CursorActionKind::None: return "none";
    case CursorActionKind::Cycle: return "cycle";
    case CursorActionKind::Select: return "select";
  }
  return "?";
}

void CalibrationConfig::validate() const {
  if (!(gain > 0.0)) throw std::invalid_argument("gain must be > 0");
  if (!(low_threshold >= 0.0)) throw std::invalid_argument("low_threshold must be >= 0");
  if (!(high_threshold > low_threshold)) {
    throw std::invalid_argument("high_threshold must exceed low_threshold");
  }
  if (!(rms_window > 0.0)) throw std::invalid_argument("rms_window must be > 0");
  if (!(dwell >= 0.0)) throw std::invalid_argument("dwell must be >= 0");
  if (!(refractory >= 0.0)) throw std::invalid_argument("refractory must be >= 0");
  if (!(hysteresis_ratio >= 0.0 && hysteresis_ratio < 1.0)) {
    throw std::invalid_argument("hysteresis_ratio must be in [0, 1)");
  }
}

double rms_window(std::span<const EmgFrame> frames, double window, double at) {
  if (frames.empty()) throw InputError("rms_window: no frames");
  if (!(window > 0.0)) throw InputError("rms_window: window must be > 0");
  if (at < frames.front().t) throw InputError("rms_window: 'at' precedes the first frame");

  const double lo = at - window + kTimeEps;
  auto by_time = [](const EmgFrame& f, double t) { return f.t < t; };
  auto first = std::lower_bound(frames.begin(), frames.end(), lo, by_time);
  // Skip a sample sitting exactly on the open left edge.
  while (first != frames.end() && first->t <= lo) ++first;
  auto last = std::upper_bound(frames.begin(), frames.end(), at,
                               [](double t, const EmgFrame& f) { return t < f.t; });
  if (first >= last) return 0.0;
  return rms_of(std::span<const EmgFrame>(first, last));
}

std::vector<double> rms_envelope(std::span<const EmgFrame> frames, double window) {
  if (!(window > 0.0)) throw InputError("rms_envelope: window must be > 0");
  std::vector<double> out;
  out.reserve(frames.size());
  std::size_t start = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double lo = frames[i].t - window + kTimeEps;
    while (start < i && frames[start].t <= lo) ++start;
    out.push_back(rms_of(frames.subspan(start, i - start + 1)));
  }
  return out;
}

SignalLevel classify_level(double power, SignalLevel prev, const CalibrationConfig& cfg) {
  const double p = cfg.gain * power;
  const double keep = 1.0 - cfg.hysteresis_ratio;
  const double high = prev == SignalLevel::High ? cfg.high_threshold * keep : cfg.high_threshold;
  const double low = prev != SignalLevel::Rest ? cfg.low_threshold * keep : cfg.low_threshold;
  if (p >= high) return SignalLevel::High;
  if (p >= low) return SignalLevel::Medium;
  return SignalLevel::Rest;
}

std::vector<TimedLevel> classify_levels(std::span<const EmgFrame> frames,
                                        const CalibrationConfig& cfg) {
  const std::vector<double> power = rms_envelope(frames, cfg.rms_window);
  std::vector<TimedLevel> out;
  out.reserve(frames.size());
  SignalLevel level = SignalLevel::Rest;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    level = classify_level(power[i], level, cfg);
    out.push_back({frames[i].t, level});
  }
  return out;
}

std::optional<CursorAction> ActionEmitter::push(const TimedLevel& sample) {
  if (last_t_ && !(sample.t > *last_t_)) {
    throw InputError("emit_actions: timestamps must strictly increase");
  }
  last_t_ = sample.t;

  if (sample.level == SignalLevel::Rest) {
    in_episode_ = false;
    in_medium_ = false;
    rest_since_action_ = true;
    return std::nullopt;
  }

  if (!in_episode_) {
    in_episode_ = true;
    episode_fired_ = false;
    const bool refractory_over =
        !acted_ || sample.t - last_action_t_ + kTimeEps >= cfg_.refractory;
    episode_eligible_ = rest_since_action_ && refractory_over;
  }

  if (sample.level == SignalLevel::Medium) {
    if (!in_medium_) medium_since_ = sample.t;
    in_medium_ = true;
  } else {
    in_medium_ = false;
  }

  if (!episode_eligible_ || episode_fired_) return std::nullopt;

  CursorActionKind kind = CursorActionKind::None;
  if (sample.level == SignalLevel::High) {
    kind = CursorActionKind::Select;
  } else if (sample.t - medium_since_ + kTimeEps >= cfg_.dwell) {
    kind = CursorActionKind::Cycle;
  }
  if (kind == CursorActionKind::None) return std::nullopt;

  episode_fired_ = true;
  rest_since_action_ = false;
  acted_ = true;
  last_action_t_ = sample.t;
  return CursorAction{kind, sample.t};
}

std::vector<CursorAction> emit_actions(std::span<const TimedLevel> levels,
                                       const CalibrationConfig& cfg) {
  ActionEmitter emitter(cfg);
  std::vector<CursorAction> out;
  for (const TimedLevel& s : levels) {
    if (auto a = emitter.push(s)) out.push_back(*a);
  }
  return out;
}

EmgClassifier::EmgClassifier(const CalibrationConfig& cfg) : cfg_(cfg), emitter_(cfg) {
  cfg_.validate();
}

EmgClassifier::Output EmgClassifier::push(const EmgFrame& frame) {
  if (!std::isfinite(frame.v)) throw InputError("sEMG frame value is not finite");
  if (!window_.empty() && !(frame.t > window_.back().t)) {
    throw InputError("sEMG frame timestamps must strictly increase");
  }
  window_.push_back(frame);
  const double lo = frame.t - cfg_.rms_window + kTimeEps;
  while (head_ + 1 < window_.size() && window_[head_].t <= lo) ++head_;
  if (head_ >= 1024 && head_ * 2 >= window_.size()) {
    window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }

  Output out;
  out.power = rms_of(std::span<const EmgFrame>(window_).subspan(head_));
  level_ = classify_level(out.power, level_, cfg_);
  out.level = level_;
  out.action = emitter_.push({frame.t, level_});
  return out;
}

std::vector<CursorAction> process_frames(std::span<const EmgFrame> frames,
                                         const CalibrationConfig& cfg) {
  cfg.validate();
  const std::vector<TimedLevel> levels = classify_levels(frames, cfg);
  return emit_actions(levels, cfg);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

namespace {

std::vector<double> full_window_powers(std::span<const EmgFrame> frames, double window,
                                       const char* what) {
  if (frames.empty() || frames.back().t - frames.front().t + kTimeEps < 2.0 * window) {
    throw InputError(std::string("calibrate: ") + what + " recording shorter than two RMS windows");
  }
  const std::vector<double> env = rms_envelope(frames, window);
  std::vector<double> out;
  const double first_full = frames.front().t + window;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].t + kTimeEps >= first_full) out.push_back(env[i]);
  }
  return out;
}

}  // namespace

CalibrationConfig calibrate(std::span<const EmgFrame> rest_frames,
                            std::span<const EmgFrame> flex_frames,
                            const CalibrationConfig& base) {
  const double rest_p95 = quantile(full_window_powers(rest_frames, base.rms_window, "rest"), 0.95);
  const double flex_median = quantile(full_window_powers(flex_frames, base.rms_window, "flex"), 0.5);
  if (!(flex_median > rest_p95)) {
    throw CalibrationFailed("flex power is not separable from rest power");
  }
  const double span = flex_median - rest_p95;
  CalibrationConfig cfg = base;
  cfg.gain = 1.0 / flex_median;
  cfg.low_threshold = cfg.gain * (rest_p95 + 0.25 * span);
  cfg.high_threshold = cfg.gain * (rest_p95 + 0.70 * span);
  cfg.validate();
  return cfg;
}

std::vector<EmgFrame> read_frames(std::istream& in) {
  std::vector<EmgFrame> out;
  for (const jsonl::Line& line : jsonl::read(in)) {
    EmgFrame f{jsonl::number_field(line, "t"), jsonl::number_field(line, "v")};
    if (!std::isfinite(f.t) || !std::isfinite(f.v)) {
      throw InputError("line " + std::to_string(line.number) + ": non-finite sample");
    }
    if (!out.empty() && !(f.t > out.back().t)) {
      throw InputError("line " + std::to_string(line.number) + ": timestamps must strictly increase");
    }
    out.push_back(f);
  }
  return out;
}

void write_actions(std::ostream& out, std::span<const CursorAction> actions) {
  for (const CursorAction& a : actions) {
    jsonl::write(out, {{"t", a.t}, {"action", action_name(a.kind)}});
  }
}

}  // namespace hitl::signal
