#pragma once

// Tabletop scene model. Millimetres and radians throughout; the table is the
// z = 0 plane and object poses give the centre of the object's base.

#include <json.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hitl::sim {

inline constexpr double kMmPerInch = 25.4;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Rotation about +z.
inline Vec3 rotate_z(Vec3 v, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

struct Box {
  Vec3 min;
  Vec3 max;

  bool contains(Vec3 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Block {
  double side = 0.0;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Cylinder {
  double radius = 0.0;
  double height = 0.0;
  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

using Shape = std::variant<Block, Cylinder>;

double shape_height(const Shape& shape);
// Radius of the vertical cylinder enclosing the shape.
double bounding_radius(const Shape& shape);
std::string_view shape_name(const Shape& shape);

struct Pose {
  Vec3 position;
  double yaw = 0.0;
  friend bool operator==(const Pose&, const Pose&) = default;
};

enum class Zone { PickArea, PlaceArea };

std::string_view zone_name(Zone zone);

struct SceneObject {
  int id = 0;
  std::string label;
  Shape shape;
  Pose pose;
  Zone zone = Zone::PickArea;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::vector<Pose> place_slots;  // where successful placements put objects

  // Throws std::invalid_argument: duplicate ids/labels, an object not resting
  // on the table, non-positive dimensions, or overlapping bounding cylinders.
  void validate() const;

  const SceneObject* find(int id) const;
  SceneObject* find(int id);
  std::size_t count_in(Zone zone) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Three blocks (2, 2.5 and 3 inch) and a shaving-cream can in the pick area,
// with one place slot per object.
Scene default_scene();

nlohmann::json to_json(const Scene& scene);
nlohmann::json to_json(const SceneObject& obj);
nlohmann::json to_json(const Pose& pose);
Scene scene_from_json(const nlohmann::json& j);  // validates
Scene load_scene_file(const std::string& path);
void save_scene_file(const Scene& scene, const std::string& path);

enum class Reachability { Pending, Reachable, Unreachable };

std::string_view reachability_name(Reachability r);

struct GraspCandidate {
  int id = 0;
  int object_id = 0;
  std::string label;
  std::array<Vec3, 2> contacts;
  Vec3 approach{0.0, 0.0, -1.0};
  double aperture = 0.0;
  Reachability reachability = Reachability::Pending;

  // Midpoint of the two finger contacts.
  Vec3 center() const { return 0.5 * (contacts[0] + contacts[1]); }
  friend bool operator==(const GraspCandidate&, const GraspCandidate&) = default;
};

nlohmann::json to_json(const GraspCandidate& g);

}  // namespace hitl::sim
