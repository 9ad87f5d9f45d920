#include "hitl/sim/world.hpp"

#include "hitl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hitl::sim {

using nlohmann::json;

namespace {

constexpr double kTimeEps = 1e-9;

int steps_for(double seconds, double dt) {
  return std::max(1, static_cast<int>(std::llround(seconds / dt)));
}

json phase_array_json(const PhaseArray& a) { return json::array({a[0], a[1], a[2], a[3]}); }

PhaseArray phase_array_from(const json& j) {
  if (!j.is_array() || j.size() != kPhaseCount) throw std::invalid_argument("expected 4 per-phase values");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view phase_name(ExecPhase phase) {
  switch (phase) {
    case ExecPhase::Approach: return "approach";
    case ExecPhase::Grasp: return "grasp";
    case ExecPhase::Lift: return "lift";
    case ExecPhase::Place: return "place";
  }
  return "?";
}

void SimConfig::validate() const {
  if (!(max_aperture > 0.0)) throw std::invalid_argument("max_aperture must be > 0");
  if (!(recognition_sigma >= 0.0) || !(recognition_yaw_sigma >= 0.0)) {
    throw std::invalid_argument("recognition noise must be >= 0");
  }
  if (!probability(recognition_failure)) throw std::invalid_argument("recognition_failure must be in [0,1]");
  for (double p : phase_failure) {
    if (!probability(p)) throw std::invalid_argument("phase_failure must be in [0,1]");
  }
  for (const auto& [label, ps] : object_phase_failure) {
    for (double p : ps) {
      if (!probability(p)) throw std::invalid_argument("object_phase_failure for " + label + " out of [0,1]");
    }
  }
  for (double d : phase_durations) {
    if (!(d > 0.0)) throw std::invalid_argument("phase durations must be > 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(recognition_duration > 0.0)) throw std::invalid_argument("recognition_duration must be > 0");
  if (cylinder_azimuths < 1) throw std::invalid_argument("cylinder_azimuths must be >= 1");
}

SimConfig SimConfig::ideal() {
  SimConfig cfg;
  cfg.recognition_sigma = 0.0;
  cfg.recognition_yaw_sigma = 0.0;
  cfg.recognition_failure = 0.0;
  return cfg;
}

json to_json(const SimConfig& cfg) {
  json overrides = json::object();
  for (const auto& [label, ps] : cfg.object_phase_failure) overrides[label] = phase_array_json(ps);
  auto vec = [](Vec3 v) { return json::array({v.x, v.y, v.z}); };
  return {{"seed", cfg.seed},
          {"workspace", {{"min", vec(cfg.workspace.min)}, {"max", vec(cfg.workspace.max)}}},
          {"max_aperture_mm", cfg.max_aperture},
          {"recognition_sigma_mm", cfg.recognition_sigma},
          {"recognition_yaw_sigma", cfg.recognition_yaw_sigma},
          {"recognition_failure", cfg.recognition_failure},
          {"recognition_duration", cfg.recognition_duration},
          {"phase_failure", phase_array_json(cfg.phase_failure)},
          {"object_phase_failure", std::move(overrides)},
          {"phase_durations", phase_array_json(cfg.phase_durations)},
          {"standoff_mm", cfg.standoff},
          {"lift_height_mm", cfg.lift_height},
          {"dt", cfg.dt},
          {"cylinder_azimuths", cfg.cylinder_azimuths}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  auto vec = [](const json& a) { return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()}; };
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.workspace = {vec(j.at("workspace").at("min")), vec(j.at("workspace").at("max"))};
  cfg.max_aperture = j.at("max_aperture_mm").get<double>();
  cfg.recognition_sigma = j.at("recognition_sigma_mm").get<double>();
  cfg.recognition_yaw_sigma = j.at("recognition_yaw_sigma").get<double>();
  cfg.recognition_failure = j.at("recognition_failure").get<double>();
  cfg.recognition_duration = j.at("recognition_duration").get<double>();
  cfg.phase_failure = phase_array_from(j.at("phase_failure"));
  for (const auto& [label, ps] : j.at("object_phase_failure").items()) {
    cfg.object_phase_failure[label] = phase_array_from(ps);
  }
  cfg.phase_durations = phase_array_from(j.at("phase_durations"));
  cfg.standoff = j.at("standoff_mm").get<double>();
  cfg.lift_height = j.at("lift_height_mm").get<double>();
  cfg.dt = j.at("dt").get<double>();
  cfg.cylinder_azimuths = j.at("cylinder_azimuths").get<int>();
  cfg.validate();
  return cfg;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::vector<SceneObject> recognize(const Scene& scene, const SimConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SceneObject> out;
  for (const SceneObject& obj : scene.objects) {
    if (obj.zone != Zone::PickArea) continue;
    if (unit(rng) < cfg.recognition_failure) continue;
    SceneObject seen = obj;
    if (cfg.recognition_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, cfg.recognition_sigma);
      seen.pose.position.x += noise(rng);
      seen.pose.position.y += noise(rng);
    }
    if (cfg.recognition_yaw_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, cfg.recognition_yaw_sigma);
      seen.pose.yaw += noise(rng);
    }
    out.push_back(std::move(seen));
  }
  if (out.empty()) throw RecognitionFailure("no objects detected");
  return out;
}

std::vector<GraspCandidate> plan_block_grasps(const SceneObject& obj) {
  const Block* block = std::get_if<Block>(&obj.shape);
  if (!block) throw std::invalid_argument(obj.label + " is not a block");
  const double half = block->side / 2.0;
  const Vec3 base = obj.pose.position;
  const Vec3 mid{0.0, 0.0, half};
  const Vec3 axes[2] = {{half, 0.0, 0.0}, {0.0, half, 0.0}};

  std::vector<GraspCandidate> out;
  for (int pair = 0; pair < 2; ++pair) {
    const Vec3 offset = rotate_z(axes[pair], obj.pose.yaw);
    GraspCandidate g;
    g.id = pair;
    g.object_id = obj.id;
    g.label = "face pair " + std::to_string(pair);
    g.contacts = {base + mid + offset, base + mid - offset};
    g.approach = {0.0, 0.0, -1.0};
    g.aperture = block->side;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GraspCandidate> plan_cylinder_grasps(const SceneObject& obj, int n) {
  const Cylinder* cyl = std::get_if<Cylinder>(&obj.shape);
  if (!cyl) throw std::invalid_argument(obj.label + " is not a cylinder");
  if (n < 1) throw std::invalid_argument("need at least one azimuth");
  const Vec3 base = obj.pose.position;
  const Vec3 mid{0.0, 0.0, cyl->height * 0.5};

  std::vector<GraspCandidate> out;
  for (int k = 0; k < n; ++k) {
    const double step = std::numbers::pi * k / n;
    const Vec3 offset = rotate_z({cyl->radius, 0.0, 0.0}, obj.pose.yaw + step);
    GraspCandidate g;
    g.id = k;
    g.object_id = obj.id;
    g.label = "azimuth " + std::to_string(static_cast<int>(std::lround(step * 180.0 / std::numbers::pi)));
    g.contacts = {base + mid + offset, base + mid - offset};
    g.approach = {0.0, 0.0, -1.0};
    g.aperture = 2.0 * cyl->radius;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GraspCandidate> plan_grasps(const SceneObject& obj, const SimConfig& cfg) {
  if (std::holds_alternative<Block>(obj.shape)) return plan_block_grasps(obj);
  return plan_cylinder_grasps(obj, cfg.cylinder_azimuths);
}

Vec3 standoff_point(const GraspCandidate& g, const SimConfig& cfg) {
  return g.center() - cfg.standoff * g.approach;
}

Reachability check_reachability(const GraspCandidate& g, const SimConfig& cfg, const Scene& scene) {
  if (g.aperture > cfg.max_aperture) return Reachability::Unreachable;
  const Vec3 standoff = standoff_point(g, cfg);
  if (!cfg.workspace.contains(g.contacts[0]) || !cfg.workspace.contains(g.contacts[1]) ||
      !cfg.workspace.contains(standoff)) {
    return Reachability::Unreachable;
  }
  // Vertical segments from each finger and the palm centre up to the standoff
  // height; an object of height h spans z in [0, h].
  const Vec3 lines[3] = {g.contacts[0], g.contacts[1], g.center()};
  for (const SceneObject& other : scene.objects) {
    if (other.id == g.object_id) continue;
    const double radius = bounding_radius(other.shape);
    const double height = shape_height(other.shape);
    for (const Vec3& p : lines) {
      const double d = std::hypot(p.x - other.pose.position.x, p.y - other.pose.position.y);
      if (d < radius && p.z < height && standoff.z > 0.0) return Reachability::Unreachable;
    }
  }
  return Reachability::Reachable;
}

ExecutionPlan make_plan(const GraspCandidate& g, const SimConfig& cfg, const Pose& place_pose) {
  return {g.id, g.object_id, cfg.phase_durations, cfg.standoff, cfg.lift_height, place_pose};
}

json to_json(const WorldEvent& ev) {
  struct Visitor {
    json operator()(const RecognitionDone& e) const {
      json objs = json::array();
      for (const SceneObject& o : e.objects) objs.push_back(to_json(o));
      return {{"type", "recognition_done"}, {"objects", std::move(objs)}};
    }
    json operator()(const RecognitionFailed&) const { return {{"type", "recognition_failed"}}; }
    json operator()(const GraspsPlanned& e) const {
      json gs = json::array();
      for (const GraspCandidate& g : e.grasps) gs.push_back(to_json(g));
      return {{"type", "grasps_planned"}, {"object", e.object_id}, {"grasps", std::move(gs)}};
    }
    json operator()(const ReachabilityComputed& e) const {
      return {{"type", "reachability"}, {"grasp", e.grasp_id}, {"reachability", reachability_name(e.reachability)}};
    }
    json operator()(const ExecutionProgress& e) const {
      return {{"type", "progress"}, {"phase", phase_name(e.phase)}, {"step", e.step}, {"of", e.phase_steps}};
    }
    json operator()(const ExecutionDone& e) const {
      json j{{"type", "execution_done"}, {"object", e.object_id}, {"success", e.success}};
      if (e.failed_phase) j["failed_phase"] = phase_name(*e.failed_phase);
      return j;
    }
  };
  return std::visit(Visitor{}, ev);
}

// ---- Execution ----------------------------------------------------------

Execution::Execution(const ExecutionPlan& plan, const SimConfig& cfg, const std::string& object_label,
                     Rng rng)
    : plan_(plan) {
  PhaseArray p = cfg.phase_failure;
  if (auto it = cfg.object_phase_failure.find(object_label); it != cfg.object_phase_failure.end()) {
    p = it->second;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    steps_[i] = steps_for(plan.durations[i], cfg.dt);
    fails_[i] = unit(rng) < p[i];
  }
}

bool Execution::at_final_step() const {
  return phase_ == kPhaseCount - 1 && done_in_phase_ == steps_[phase_] - 1;
}

void Execution::halt() {
  if (finished_) return;
  if (at_final_step()) {
    halt_deferred_ = true;
    return;
  }
  halted_ = true;
}

void Execution::resume() { halted_ = false; }

std::vector<WorldEvent> Execution::step() {
  std::vector<WorldEvent> out;
  if (halted_ || finished_) return out;
  ++done_in_phase_;
  const auto phase = static_cast<ExecPhase>(phase_);
  out.push_back(ExecutionProgress{phase, done_in_phase_, steps_[phase_]});
  if (done_in_phase_ < steps_[phase_]) return out;

  if (fails_[phase_]) {
    finished_ = true;
    out.push_back(ExecutionDone{plan_.object_id, false, phase});
  } else if (phase_ + 1 == kPhaseCount) {
    finished_ = true;
    out.push_back(ExecutionDone{plan_.object_id, true, std::nullopt});
  } else {
    ++phase_;
    done_in_phase_ = 0;
  }
  return out;
}

std::vector<WorldEvent> execute(const ExecutionPlan& plan, const SimConfig& cfg,
                                const std::string& object_label, Rng rng) {
  Execution exec(plan, cfg, object_label, std::move(rng));
  std::vector<WorldEvent> out;
  while (!exec.finished()) {
    for (WorldEvent& ev : exec.step()) out.push_back(std::move(ev));
  }
  return out;
}

// ---- World --------------------------------------------------------------

World::World(Scene scene, SimConfig cfg) : scene_(std::move(scene)), cfg_(std::move(cfg)) {
  scene_.validate();
  cfg_.validate();
  if (scene_.place_slots.size() < scene_.count_in(Zone::PickArea)) {
    throw std::invalid_argument("scene needs a place slot for every pick-area object");
  }
}

std::vector<WorldEvent> World::step() {
  ++ticks_;
  std::vector<WorldEvent> out;
  if (recognition_due_ && ticks_ >= *recognition_due_) {
    recognition_due_.reset();
    Rng rng = make_rng(cfg_.seed, 1, recognition_calls_++);
    try {
      detected_ = recognize(scene_, cfg_, rng);
      out.push_back(RecognitionDone{detected_});
    } catch (const RecognitionFailure&) {
      detected_.clear();
      out.push_back(RecognitionFailed{});
    }
  }
  if (execution_) {
    for (WorldEvent& ev : execution_->step()) {
      if (auto* done = std::get_if<ExecutionDone>(&ev); done && done->success) {
        SceneObject* obj = scene_.find(done->object_id);
        obj->zone = Zone::PlaceArea;
        obj->pose = *execution_place_;
      }
      out.push_back(std::move(ev));
    }
    if (execution_->finished()) {
      execution_.reset();
      execution_place_.reset();
    }
  }
  return out;
}

std::vector<WorldEvent> World::advance_to(double t) {
  std::vector<WorldEvent> out;
  while (static_cast<double>(ticks_ + 1) * cfg_.dt <= t + kTimeEps) {
    for (WorldEvent& ev : step()) out.push_back(std::move(ev));
  }
  return out;
}

void World::request_recognition() {
  grasps_.clear();
  recognition_due_ = ticks_ + static_cast<std::uint64_t>(steps_for(cfg_.recognition_duration, cfg_.dt));
}

std::vector<WorldEvent> World::request_grasps(int object_id) {
  auto it = std::find_if(detected_.begin(), detected_.end(),
                         [object_id](const SceneObject& o) { return o.id == object_id; });
  if (it == detected_.end()) throw ProtocolViolation("grasp request for an undetected object");

  grasps_ = plan_grasps(*it, cfg_);
  for (GraspCandidate& g : grasps_) g.id = next_grasp_id_++;

  std::vector<WorldEvent> out;
  out.push_back(GraspsPlanned{object_id, grasps_});
  for (GraspCandidate& g : grasps_) {
    g.reachability = check_reachability(g, cfg_, scene_);
    out.push_back(ReachabilityComputed{g.id, g.reachability});
  }
  return out;
}

Pose World::next_place_pose() const {
  for (const Pose& slot : scene_.place_slots) {
    const bool taken = std::any_of(scene_.objects.begin(), scene_.objects.end(), [&](const SceneObject& o) {
      return o.zone == Zone::PlaceArea &&
             std::hypot(o.pose.position.x - slot.position.x, o.pose.position.y - slot.position.y) < 1.0;
    });
    if (!taken) return slot;
  }
  throw ProtocolViolation("no free place slot");
}

void World::start_execution(int grasp_id) {
  if (execution_) throw ProtocolViolation("an execution is already running");
  auto it = std::find_if(grasps_.begin(), grasps_.end(), [grasp_id](const GraspCandidate& g) { return g.id == grasp_id; });
  if (it == grasps_.end() || it->reachability != Reachability::Reachable) {
    throw ProtocolViolation("execution requested for a grasp that is not reachable");
  }
  const SceneObject* obj = scene_.find(it->object_id);
  execution_place_ = next_place_pose();
  execution_.emplace(make_plan(*it, cfg_, *execution_place_), cfg_, obj->label,
                     make_rng(cfg_.seed, 2, execution_calls_++));
}

void World::halt() {
  if (execution_) execution_->halt();
}

void World::resume() {
  if (execution_) execution_->resume();
}

void World::abort() {
  execution_.reset();
  execution_place_.reset();
}

}  // namespace hitl::sim
