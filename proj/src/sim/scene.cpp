#include "hitl/sim/scene.hpp"

#include "hitl/errors.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace hitl::sim {

using nlohmann::json;

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

Pose pose_from_json(const json& j) {
  Pose p;
  p.position = {j.at("x").get<double>(), j.at("y").get<double>(), j.value("z", 0.0)};
  p.yaw = j.value("yaw", 0.0);
  return p;
}

Shape shape_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "block") return Block{j.at("side_mm").get<double>()};
  if (type == "cylinder") {
    return Cylinder{j.at("radius_mm").get<double>(), j.at("height_mm").get<double>()};
  }
  throw std::invalid_argument("unknown shape type '" + type + "'");
}

}  // namespace

double shape_height(const Shape& shape) {
  return std::visit(overloaded{[](const Block& b) { return b.side; },
                               [](const Cylinder& c) { return c.height; }},
                    shape);
}

double bounding_radius(const Shape& shape) {
  return std::visit(overloaded{[](const Block& b) { return b.side * std::sqrt(0.5); },
                               [](const Cylinder& c) { return c.radius; }},
                    shape);
}

std::string_view shape_name(const Shape& shape) {
  return std::holds_alternative<Block>(shape) ? "block" : "cylinder";
}

std::string_view zone_name(Zone zone) { return zone == Zone::PickArea ? "pick" : "place"; }

std::string_view reachability_name(Reachability r) {
  switch (r) {
    case Reachability::Pending: return "pending";
    case Reachability::Reachable: return "reachable";
    case Reachability::Unreachable: return "unreachable";
  }
  return "?";
}

void Scene::validate() const {
  std::set<int> ids;
  std::set<std::string> labels;
  for (const SceneObject& o : objects) {
    if (!ids.insert(o.id).second) throw std::invalid_argument("duplicate object id");
    if (!labels.insert(o.label).second) throw std::invalid_argument("duplicate object label '" + o.label + "'");
    if (o.pose.position.z != 0.0) throw std::invalid_argument(o.label + " does not rest on the table");
    const bool ok = std::visit(overloaded{[](const Block& b) { return b.side > 0.0; },
                                          [](const Cylinder& c) { return c.radius > 0.0 && c.height > 0.0; }},
                               o.shape);
    if (!ok) throw std::invalid_argument(o.label + " has non-positive dimensions");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      const Vec3 d = objects[i].pose.position - objects[j].pose.position;
      const double gap = std::hypot(d.x, d.y);
      if (gap < bounding_radius(objects[i].shape) + bounding_radius(objects[j].shape)) {
        throw std::invalid_argument(objects[i].label + " and " + objects[j].label + " interpenetrate");
      }
    }
  }
}

const SceneObject* Scene::find(int id) const {
  for (const SceneObject& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

SceneObject* Scene::find(int id) {
  return const_cast<SceneObject*>(static_cast<const Scene*>(this)->find(id));
}

std::size_t Scene::count_in(Zone zone) const {
  std::size_t n = 0;
  for (const SceneObject& o : objects) n += o.zone == zone;
  return n;
}

Scene default_scene() {
  Scene s;
  const double xs[] = {-210.0, -70.0, 70.0, 210.0};
  s.objects.push_back({0, "block1", Block{2.0 * kMmPerInch}, {{xs[0], -200.0, 0.0}, 0.0}, Zone::PickArea});
  s.objects.push_back({1, "block2", Block{2.5 * kMmPerInch}, {{xs[1], -200.0, 0.0}, 0.3}, Zone::PickArea});
  s.objects.push_back({2, "block3", Block{3.0 * kMmPerInch}, {{xs[2], -200.0, 0.0}, -0.2}, Zone::PickArea});
  s.objects.push_back({3, "ycb", Cylinder{33.0, 165.0}, {{xs[3], -200.0, 0.0}, 0.0}, Zone::PickArea});
  for (double x : xs) s.place_slots.push_back({{x, 200.0, 0.0}, 0.0});
  return s;
}

json to_json(const Pose& pose) {
  return {{"x", pose.position.x}, {"y", pose.position.y}, {"z", pose.position.z}, {"yaw", pose.yaw}};
}

json to_json(const SceneObject& obj) {
  json shape = std::visit(
      overloaded{[](const Block& b) { return json{{"type", "block"}, {"side_mm", b.side}}; },
                 [](const Cylinder& c) {
                   return json{{"type", "cylinder"}, {"radius_mm", c.radius}, {"height_mm", c.height}};
                 }},
      obj.shape);
  return {{"id", obj.id},
          {"label", obj.label},
          {"shape", std::move(shape)},
          {"pose", to_json(obj.pose)},
          {"zone", zone_name(obj.zone)}};
}

json to_json(const Scene& scene) {
  json objects = json::array();
  for (const SceneObject& o : scene.objects) objects.push_back(to_json(o));
  json slots = json::array();
  for (const Pose& p : scene.place_slots) slots.push_back(to_json(p));
  return {{"objects", std::move(objects)}, {"place_slots", std::move(slots)}};
}

Scene scene_from_json(const json& j) {
  Scene s;
  try {
    for (const json& o : j.at("objects")) {
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      obj.label = o.at("label").get<std::string>();
      obj.shape = shape_from_json(o.at("shape"));
      obj.pose = pose_from_json(o.at("pose"));
      const std::string zone = o.value("zone", "pick");
      if (zone != "pick" && zone != "place") throw std::invalid_argument("zone must be pick or place");
      obj.zone = zone == "pick" ? Zone::PickArea : Zone::PlaceArea;
      s.objects.push_back(std::move(obj));
    }
    if (j.contains("place_slots")) {
      for (const json& p : j.at("place_slots")) s.place_slots.push_back(pose_from_json(p));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file " + path);
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw InputError("scene file is not valid JSON: " + path);
  return scene_from_json(j);
}

void save_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write scene file " + path);
  out << to_json(scene).dump(2) << '\n';
}

json to_json(const GraspCandidate& g) {
  auto vec = [](Vec3 v) { return json::array({v.x, v.y, v.z}); };
  return {{"id", g.id},
          {"object", g.object_id},
          {"label", g.label},
          {"contacts", json::array({vec(g.contacts[0]), vec(g.contacts[1])})},
          {"approach", vec(g.approach)},
          {"aperture_mm", g.aperture},
          {"reachability", reachability_name(g.reachability)}};
}

}  // namespace hitl::sim
