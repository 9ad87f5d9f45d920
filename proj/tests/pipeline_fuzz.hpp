#pragma once

// Randomized driver for the pipeline against a live World: random Cycle,
// Select and voice button commands interleaved with random amounts of
// simulated time. Counts every breach of the pipeline's safety properties.

#include "hitl/errors.hpp"
#include "hitl/pipeline.hpp"
#include "hitl/sim/world.hpp"

#include <random>
#include <set>
#include <utility>

namespace fuzz {

using hitl::pipeline::PipelineState;

struct Stats {
  long commands = 0;
  long engine_events = 0;
  long illegal_transitions = 0;
  long arm_motion_outside_execution = 0;
  long protocol_violations = 0;
  long wrap_failures = 0;
  long wrap_checks = 0;
  std::set<PipelineState> visited;
};

inline bool legal_edge(PipelineState from, PipelineState to) {
  using S = PipelineState;
  if (from == to) return true;
  static const std::set<std::pair<S, S>> edges{
      {S::ObjectRecognition, S::ObjectSelection}, {S::ObjectSelection, S::GraspSelection},
      {S::ObjectSelection, S::ObjectRecognition}, {S::GraspSelection, S::GraspExecution},
      {S::GraspSelection, S::ObjectSelection},    {S::GraspExecution, S::PausedExecution},
      {S::GraspExecution, S::ObjectRecognition},  {S::PausedExecution, S::GraspExecution},
      {S::PausedExecution, S::ObjectRecognition},
  };
  return edges.count({from, to}) > 0;
}

class Driver {
 public:
  explicit Driver(std::uint64_t seed) : rng_(seed), seed_(seed) { reset(); }

  Stats run(long n_commands) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> ticks(1, 40);
    std::uniform_int_distribution<int> button(0, 8);
    for (long i = 0; i < n_commands; ++i) {
      if (world_->scene().count_in(hitl::sim::Zone::PickArea) == 0) reset();
      if (u(rng_) < 0.3) {
        const int n = ticks(rng_);
        for (int k = 0; k < n; ++k) feed(world_->step());
      }
      t_ = std::max(t_, world_->now()) + 0.01;
      hitl::MenuCommand cmd;
      cmd.t = t_;
      const double r = u(rng_);
      if (r < 0.45) {
        cmd.kind = hitl::CommandKind::Cycle;
      } else if (r < 0.9) {
        cmd.kind = hitl::CommandKind::Select;
      } else {
        cmd.kind = hitl::CommandKind::Select;
        cmd.source = hitl::Device::Voice;
        cmd.button = static_cast<hitl::ButtonId>(button(rng_));
      }
      if (i % 97 == 0) check_wrap();
      const auto before = pipeline_.state();
      const auto out = pipeline_.apply(cmd);
      ++stats_.commands;
      note(before, out);
    }
    return stats_;
  }

 private:
  void reset() {
    hitl::sim::SimConfig cfg;
    cfg.seed = seed_ + resets_++;
    cfg.recognition_failure = 0.2;
    cfg.phase_failure = {0.1, 0.1, 0.1, 0.1};
    cfg.phase_durations = {0.5, 0.5, 0.5, 0.5};
    world_.emplace(hitl::sim::default_scene(), cfg);
    pipeline_ = hitl::pipeline::Pipeline();
    t_ = 0.0;
    dispatch(pipeline_.start());
  }

  void note(PipelineState before, const hitl::pipeline::Outcome& out) {
    const auto after = pipeline_.state();
    stats_.visited.insert(after);
    if (!legal_edge(before, after)) ++stats_.illegal_transitions;
    for (const auto& r : out.requests) {
      if (hitl::pipeline::is_arm_motion(r) && after != PipelineState::GraspExecution) {
        ++stats_.arm_motion_outside_execution;
      }
    }
    dispatch(out.requests);
  }

  void feed(const std::vector<hitl::sim::WorldEvent>& events) {
    for (const auto& ev : events) {
      const auto before = pipeline_.state();
      ++stats_.engine_events;
      try {
        note(before, pipeline_.on_engine_event(ev, world_->now()));
      } catch (const hitl::ProtocolViolation&) {
        ++stats_.protocol_violations;
      }
    }
  }

  void dispatch(const std::vector<hitl::pipeline::EngineRequest>& requests) {
    namespace p = hitl::pipeline;
    for (const auto& r : requests) {
      try {
        if (std::holds_alternative<p::RequestRecognition>(r)) world_->request_recognition();
        if (const auto* g = std::get_if<p::RequestGrasps>(&r)) feed(world_->request_grasps(g->object_id));
        if (const auto* s = std::get_if<p::StartExecution>(&r)) world_->start_execution(s->grasp_id);
        if (std::holds_alternative<p::HaltExecution>(r)) world_->halt();
        if (std::holds_alternative<p::ResumeExecution>(r)) world_->resume();
        if (std::holds_alternative<p::AbortExecution>(r)) world_->abort();
      } catch (const hitl::ProtocolViolation&) {
        ++stats_.protocol_violations;
      }
    }
  }

  // Cycling through the whole button set lands back on the same button.
  void check_wrap() {
    if (pipeline_.buttons().empty()) return;
    auto copy = pipeline_;
    const auto start = copy.buttons().highlight();
    for (std::size_t k = 0; k < copy.buttons().size(); ++k) {
      copy.apply({hitl::CommandKind::Cycle, t_, hitl::Device::Direct, {}});
    }
    ++stats_.wrap_checks;
    if (copy.buttons().highlight() != start || copy.state() != pipeline_.state()) ++stats_.wrap_failures;
  }

  std::mt19937_64 rng_;
  std::uint64_t seed_;
  std::uint64_t resets_ = 0;
  std::optional<hitl::sim::World> world_;
  hitl::pipeline::Pipeline pipeline_;
  double t_ = 0.0;
  Stats stats_;
};

}  // namespace fuzz
