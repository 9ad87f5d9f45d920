#include "hitl/service/scripted_user.hpp"

#include "hitl/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>

namespace hitl::service {

using pipeline::PipelineState;

UserProfile default_profile(Device device) {
  UserProfile p;
  switch (device) {
    case Device::Mouse:
      p.reaction_mean = 1.2;
      p.reaction_jitter = 0.4;
      p.error_rate = 0.02;
      break;
    case Device::Voice:
      p.reaction_mean = 2.5;
      p.reaction_jitter = 0.8;
      p.error_rate = 0.1;
      break;
    case Device::Switch:
      p.reaction_mean = 1.0;
      p.reaction_jitter = 0.4;
      p.error_rate = 0.05;
      break;
    case Device::Semg:
      p.reaction_mean = 1.5;
      p.reaction_jitter = 0.5;
      p.error_rate = 0.05;
      break;
    case Device::Direct:
      p.reaction_mean = 0.5;
      break;
  }
  return p;
}

namespace {

constexpr std::uint64_t kUserStream = 3;
constexpr double kBurstHz = 80.0;
constexpr double kRestNoise = 0.01;
constexpr double kRestLead = 0.05;
constexpr double kRestTail = 0.6;
constexpr double kMediumBurst = 0.5;
constexpr double kHighBurst = 0.3;

class ScriptedUser {
 public:
  ScriptedUser(Session& session, const ScriptOptions& options)
      : s_(session),
        opt_(options),
        p_(options.profile),
        rng_(sim::make_rng(options.seed, kUserStream, 0)),
        queue_(options.objects) {}

  void run() {
    if (!s_.started()) s_.start();
    while (!s_.finished()) step();
  }

 private:
  const pipeline::SessionContext& ctx() const { return s_.pipeline().context(); }
  Device device() const { return s_.config().device; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool chance(double p) { return p > 0.0 && uniform(0.0, 1.0) < p; }
  double reaction() {
    return std::max(0.05, p_.reaction_mean + uniform(-p_.reaction_jitter, p_.reaction_jitter));
  }

  void wait() { s_.advance_to(s_.now() + s_.world().config().dt); }

  void drop(const std::string& label) {
    const auto it = std::find(queue_.begin(), queue_.end(), label);
    if (it != queue_.end()) queue_.erase(it);
    attempts_.erase(label);
    reruns_ = 0;
  }

  void step() {
    const double now = s_.now();
    const auto state = s_.pipeline().state();
    if (state != last_state_) {
      last_state_ = state;
      entered_at_ = now;
      if (state == PipelineState::GraspExecution && !paused_this_run_) {
        pause_after_ = chance(p_.pause_probability) ? std::optional(uniform(2.0, 40.0)) : std::nullopt;
      }
      if (state == PipelineState::PausedExecution) {
        paused_this_run_ = true;
        pause_after_.reset();
      }
      if (state != PipelineState::GraspExecution && state != PipelineState::PausedExecution) {
        paused_this_run_ = false;
      }
    }
    if (seen_trials_ < ctx().trials.size()) {
      for (; seen_trials_ < ctx().trials.size(); ++seen_trials_) {
        const auto& trial = ctx().trials[seen_trials_];
        const int n = ++attempts_[trial.label];
        if (trial.success || !opt_.retry_on_failure || n >= p_.max_attempts) drop(trial.label);
      }
      return;
    }
    if (queue_.empty() && (state == PipelineState::ObjectSelection || state == PipelineState::GraspSelection)) {
      s_.finish(now, true);
      return;
    }
    if (now > p_.session_limit) {
      s_.finish(now, false);
      return;
    }

    switch (state) {
      case PipelineState::ObjectRecognition:
        wait();
        return;
      case PipelineState::ObjectSelection: {
        if (queue_.empty()) return;
        const auto& objects = ctx().objects;
        const auto it = std::find_if(objects.begin(), objects.end(),
                                     [&](const auto& o) { return o.label == queue_.front(); });
        if (it == objects.end()) {
          if (++reruns_ > p_.max_reruns) {
            drop(queue_.front());
            return;
          }
          act(ButtonId::RerunVision);
          return;
        }
        const auto index = static_cast<std::size_t>(it - objects.begin());
        act(index == ctx().object_highlight ? ButtonId::SelectObject : ButtonId::NextObject);
        return;
      }
      case PipelineState::GraspSelection: {
        const auto& grasps = ctx().grasps;
        const bool any = std::any_of(grasps.begin(), grasps.end(), [](const auto& g) {
          return g.reachability == sim::Reachability::Reachable;
        });
        if (!any) {
          // Nothing this object can be picked with: go back and skip it.
          for (const auto& obj : ctx().objects) {
            if (ctx().selected_object == obj.id) give_up_ = obj.label;
          }
          act(ButtonId::Back);
          return;
        }
        const auto* g = ctx().highlighted_grasp();
        act(g && g->reachability == sim::Reachability::Reachable ? ButtonId::SelectGrasp : ButtonId::NextGrasp);
        return;
      }
      case PipelineState::GraspExecution:
        if (pause_after_ && now - entered_at_ >= *pause_after_) {
          act(ButtonId::Pause);
          return;
        }
        wait();
        return;
      case PipelineState::PausedExecution:
        if (now - entered_at_ < p_.pause_hold) {
          wait();
          return;
        }
        act(ButtonId::Continue);
        return;
    }
  }

  // One gesture towards activating `target`.
  void act(ButtonId target) {
    const double start = s_.now() + reaction();
    const bool mistake = chance(p_.error_rate);
    if (device() == Device::Voice) {
      const std::string phrase = mistake ? "dance" : std::string(button_label(target));
      s_.input(start, DeviceInput::utterance("Echo, tell the robot " + phrase));
    } else {
      const bool on_target = s_.pipeline().buttons().highlighted() == target;
      gesture(start, on_target && !mistake ? CommandKind::Select : CommandKind::Cycle);
    }
    after_action();
  }

  void after_action() {
    if (!give_up_.empty() && s_.pipeline().state() == PipelineState::ObjectSelection) {
      drop(give_up_);
      give_up_.clear();
    }
    if (s_.pipeline().state() == PipelineState::GraspSelection) reruns_ = 0;
  }

  void gesture(double start, CommandKind kind) {
    switch (device()) {
      case Device::Mouse:
      case Device::Direct:
        s_.input(start, kind == CommandKind::Select ? DeviceInput::select() : DeviceInput::cycle());
        return;
      case Device::Switch: {
        const double hold = kind == CommandKind::Select ? uniform(1.3, 2.2) : uniform(0.25, 0.6);
        s_.input(start, DeviceInput::press());
        s_.input(start + hold, DeviceInput::release());
        return;
      }
      case Device::Semg:
        burst(start, kind);
        return;
      case Device::Voice:
        return;
    }
  }

  void burst(double start, CommandKind kind) {
    const auto& cfg = s_.config().emg;
    const double rms = kind == CommandKind::Select ? 1.5 * cfg.high_threshold
                                                   : 0.5 * (cfg.low_threshold + cfg.high_threshold);
    const double amplitude = rms * std::numbers::sqrt2 / cfg.gain;
    const double active = kind == CommandKind::Select ? kHighBurst : kMediumBurst;
    const double total = kRestLead + active + kRestTail;
    const auto n = static_cast<long>(std::ceil(total * p_.frame_rate));
    const double t0 = std::max(start, last_frame_t_ + 1.0 / p_.frame_rate);
    for (long k = 0; k < n; ++k) {
      const double rel = static_cast<double>(k) / p_.frame_rate;
      const double t = t0 + rel;
      double v = uniform(-kRestNoise, kRestNoise) / cfg.gain;
      if (rel >= kRestLead && rel < kRestLead + active) {
        v += amplitude * std::sin(2.0 * std::numbers::pi * kBurstHz * rel);
      }
      s_.input(t, DeviceInput::frame(v));
      last_frame_t_ = t;
    }
  }

  Session& s_;
  const ScriptOptions& opt_;
  UserProfile p_;
  sim::Rng rng_;
  std::vector<std::string> queue_;
  std::map<std::string, int> attempts_;
  std::size_t seen_trials_ = 0;
  int reruns_ = 0;
  std::string give_up_;
  std::optional<PipelineState> last_state_;
  double entered_at_ = 0.0;
  std::optional<double> pause_after_;
  bool paused_this_run_ = false;
  double last_frame_t_ = -1.0;
};

}  // namespace

void run_scripted_user(Session& session, const ScriptOptions& options) {
  ScriptedUser(session, options).run();
}

SessionTrace record_scripted(const SessionConfig& config, const ScriptOptions& options) {
  Session session(config);
  run_scripted_user(session, options);
  return session.trace();
}

}  // namespace hitl::service
