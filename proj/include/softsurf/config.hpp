// Copyright 2026 The softsurf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOFTSURF_CONFIG_HPP_
#define SOFTSURF_CONFIG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "softsurf/math.hpp"

namespace softsurf {

// Raised for malformed documents and invariant violations alike; the message
// names the offending key path or the violated invariant.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ShapeKind { Sphere, Box, Cylinder, Ellipsoid };

// dims meaning by kind:
//   Sphere    - x = radius
//   Box       - half extents (x, y, z)
//   Cylinder  - x = radius, z = half height (axis along body z)
//   Ellipsoid - semi axes (x, y, z)
struct Shape {
  ShapeKind kind = ShapeKind::Sphere;
  Vec3 dims{0.025, 0.025, 0.025};

  static Shape sphere(double radius) {
    return {ShapeKind::Sphere, {radius, radius, radius}};
  }
  static Shape box(double hx, double hy, double hz) {
    return {ShapeKind::Box, {hx, hy, hz}};
  }
  static Shape cylinder(double radius, double half_height) {
    return {ShapeKind::Cylinder, {radius, radius, half_height}};
  }
  static Shape ellipsoid(double ax, double ay, double az) {
    return {ShapeKind::Ellipsoid, {ax, ay, az}};
  }

  // Radius of the tightest origin-centered bounding sphere.
  double bounding_radius() const {
    switch (kind) {
      case ShapeKind::Sphere:
        return dims.x;
      case ShapeKind::Box:
      case ShapeKind::Ellipsoid:
        return dims.norm() == 0.0 ? 0.0
               : kind == ShapeKind::Box
                   ? std::sqrt(dims.x * dims.x + dims.y * dims.y +
                               dims.z * dims.z)
                   : std::max(std::max(dims.x, dims.y), dims.z);
      case ShapeKind::Cylinder:
        return std::sqrt(dims.x * dims.x + dims.z * dims.z);
    }
    return dims.x;
  }

  // Distance from center to the lowest body point when upright.
  double bottom_extent() const {
    switch (kind) {
      case ShapeKind::Sphere:
        return dims.x;
      case ShapeKind::Box:
      case ShapeKind::Cylinder:
      case ShapeKind::Ellipsoid:
        return dims.z;
    }
    return dims.z;
  }
};

inline const char* shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Sphere:
      return "sphere";
    case ShapeKind::Box:
      return "box";
    case ShapeKind::Cylinder:
      return "cylinder";
    case ShapeKind::Ellipsoid:
      return "ellipsoid";
  }
  return "sphere";
}

struct ObjectSpec {
  std::string name;
  Shape shape;
  double mass = 0.0125;        // kg
  double friction = 0.4;       // Coulomb coefficient against fabric
  std::optional<Vec3> inertia_override;  // principal moments, kg m^2

  // Principal moments of inertia in the body frame, uniform density unless
  // overridden.
  Vec3 inertia() const {
    if (inertia_override) return *inertia_override;
    const Vec3& d = shape.dims;
    switch (shape.kind) {
      case ShapeKind::Sphere: {
        double i = 0.4 * mass * d.x * d.x;
        return {i, i, i};
      }
      case ShapeKind::Box: {
        double c = mass / 3.0;  // (1/12) m (a^2+b^2) with full extents 2*half
        return {c * (d.y * d.y + d.z * d.z), c * (d.x * d.x + d.z * d.z),
                c * (d.x * d.x + d.y * d.y)};
      }
      case ShapeKind::Cylinder: {
        double h = 2.0 * d.z;
        double ixy = mass * (3.0 * d.x * d.x + h * h) / 12.0;
        return {ixy, ixy, 0.5 * mass * d.x * d.x};
      }
      case ShapeKind::Ellipsoid: {
        double c = 0.2 * mass;
        return {c * (d.y * d.y + d.z * d.z), c * (d.x * d.x + d.z * d.z),
                c * (d.x * d.x + d.y * d.y)};
      }
    }
    return {1e-6, 1e-6, 1e-6};
  }
};

struct FrameConfig {
  double frame_side = 0.5;  // m; target-reaching configs use 1.0
  double stroke = 0.5;      // m of actuator travel

  // Corner order is counter-clockwise from the origin; actuator i sits at
  // corner i.
  std::array<Vec2, 4> corner_xy() const {
    return {Vec2{0.0, 0.0}, Vec2{frame_side, 0.0},
            Vec2{frame_side, frame_side}, Vec2{0.0, frame_side}};
  }
};

struct FabricConfig {
  double fabric_side = 0.6;       // m; larger than the frame -> slack + sag
  // 2.5 cm spacing: the inter-particle gap stays under the smallest catalog
  // object's footprint so nothing falls between particles.
  int grid_n = 25;
  double areal_density = 0.15;    // kg/m^2
  double stretch_stiffness = 80.0;   // N/m
  double shear_stiffness = 15.0;     // N/m
  double bend_stiffness = 4.0;       // N/m
  double damping = 0.02;             // N s/m, spring dashpot

  double spacing() const { return fabric_side / (grid_n - 1); }
  double particle_mass() const {
    return areal_density * fabric_side * fabric_side /
           (static_cast<double>(grid_n) * grid_n);
  }
};

struct SimConfig {
  double physics_dt = 1.0 / 2400.0;  // s; inside dt < 2 sqrt(m/k) at defaults
  double control_hz = 60.0;          // control decisions per second
  double gravity = 9.81;             // m/s^2, downward
  double contact_stiffness = 400.0;  // N/m
  // Negative means "derive": 1% of critical damping for a particle on the
  // contact penalty spring.
  double contact_damping = -1.0;  // N s/m
  // Fabric deforms under a rolling object and returns the energy
  // imperfectly; without this the object sloshes forever in the sag pocket.
  double rolling_resistance = 0.02;  // dimensionless
  uint64_t seed = 0;

  double control_dt() const { return 1.0 / control_hz; }

  int substeps_per_control() const {
    return static_cast<int>(std::llround(control_dt() / physics_dt));
  }
};

struct Config {
  FrameConfig frame;
  FabricConfig fabric;
  SimConfig sim;
  std::vector<ObjectSpec> objects;  // defaults to the built-in catalog
};

// ---------------------------------------------------------------------------
// Catalog

inline std::vector<ObjectSpec> object_catalog() {
  std::vector<ObjectSpec> cat;
  cat.push_back({"sphere", Shape::sphere(0.0255), 0.0125, 0.4, std::nullopt});
  cat.push_back({"cube", Shape::box(0.025, 0.025, 0.025), 0.066, 0.45,
                 std::nullopt});
  cat.push_back({"disk", Shape::cylinder(0.02, 0.002), 0.0038, 0.4,
                 std::nullopt});
  cat.push_back({"apple", Shape::sphere(0.03), 0.150, 0.5, std::nullopt});
  cat.push_back({"cylinder", Shape::cylinder(0.0235, 0.02), 0.0257, 0.4,
                 std::nullopt});
  cat.push_back({"egg", Shape::ellipsoid(0.022, 0.022, 0.031), 0.0686, 0.45,
                 std::nullopt});
  // Thin-walled shell: Iz = m r^2, Ixy = m (r^2/2 + h^2/12).
  {
    double r = 0.021, hh = 0.019, m = 0.040;
    double h = 2.0 * hh;
    Vec3 shell{m * (r * r / 2.0 + h * h / 12.0),
               m * (r * r / 2.0 + h * h / 12.0), m * r * r};
    cat.push_back({"deburrer", Shape::cylinder(r, hh), m, 0.5, shell});
  }
  return cat;
}

inline const ObjectSpec& find_object(const std::vector<ObjectSpec>& objects,
                                     const std::string& name) {
  for (const auto& o : objects)
    if (o.name == name) return o;
  throw ConfigError("unknown object \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const FrameConfig& f) {
  if (!(f.frame_side > 0.0)) throw ConfigError("frame.frame_side > 0");
  if (!(f.stroke > 0.0)) throw ConfigError("frame.stroke > 0");
}

inline void validate(const FabricConfig& f) {
  if (f.grid_n < 2) throw ConfigError("fabric.grid_n ≥ 2");
  if (!(f.fabric_side > 0.0)) throw ConfigError("fabric.fabric_side > 0");
  if (!(f.areal_density > 0.0)) throw ConfigError("fabric.areal_density > 0");
  if (f.stretch_stiffness < 0.0)
    throw ConfigError("fabric.stretch_stiffness ≥ 0");
  if (f.shear_stiffness < 0.0)
    throw ConfigError("fabric.shear_stiffness ≥ 0");
  if (f.bend_stiffness < 0.0) throw ConfigError("fabric.bend_stiffness ≥ 0");
  if (f.damping < 0.0) throw ConfigError("fabric.damping ≥ 0");
}

inline void validate(const SimConfig& s) {
  if (!(s.physics_dt > 0.0)) throw ConfigError("sim.physics_dt > 0");
  if (!(s.control_hz > 0.0)) throw ConfigError("sim.control_hz > 0");
  if (!(s.gravity >= 0.0)) throw ConfigError("sim.gravity ≥ 0");
  if (!(s.contact_stiffness > 0.0))
    throw ConfigError("sim.contact_stiffness > 0");
  if (s.rolling_resistance < 0.0)
    throw ConfigError("sim.rolling_resistance \u2265 0");
  double period = s.control_dt();
  int n = s.substeps_per_control();
  if (n < 1 || std::abs(n * s.physics_dt - period) > 1e-9 * period)
    throw ConfigError(
        "sim.physics_dt must divide the control period into an integer "
        "number of substeps");
}

inline void validate(const ObjectSpec& o) {
  if (o.name.empty()) throw ConfigError("object name must be non-empty");
  if (!(o.mass > 0.0)) throw ConfigError("object \"" + o.name + "\": mass > 0");
  if (o.friction < 0.0)
    throw ConfigError("object \"" + o.name + "\": friction ≥ 0");
  const Vec3& d = o.shape.dims;
  bool dims_ok = d.x > 0.0 && d.y > 0.0 && d.z > 0.0;
  if (!dims_ok)
    throw ConfigError("object \"" + o.name + "\": shape dimensions > 0");
  if (o.inertia_override) {
    const Vec3& i = *o.inertia_override;
    if (!(i.x > 0.0 && i.y > 0.0 && i.z > 0.0))
      throw ConfigError("object \"" + o.name +
                        "\": inertia_override must be positive definite");
  }
}

inline void finalize(Config& c) {
  validate(c.frame);
  validate(c.fabric);
  validate(c.sim);
  if (c.sim.contact_damping < 0.0) {
    c.sim.contact_damping =
        0.01 * 2.0 *
        std::sqrt(c.fabric.particle_mass() * c.sim.contact_stiffness);
  }
  if (c.objects.empty()) c.objects = object_catalog();
  for (const auto& o : c.objects) validate(o);
}

inline Config default_config() {
  Config c;
  finalize(c);
  return c;
}

// Scaled analogue of the hardware geometry used for target reaching: a 1 m
// frame keeps the 1.2x slack ratio of the 0.6 m fabric on the 0.5 m frame.
// The grid is refined so the training sphere always spans at least one
// particle cell, and stiffnesses are reduced to keep the explicit
// integrator inside its stability bound at the lighter particle mass.
inline Config learn_config() {
  Config c;
  c.frame.frame_side = 1.0;
  // Modest slack: a deeply sagged sheet is safe but too sluggish to steer
  // inside an episode, and nothing ever falls.
  c.fabric.fabric_side = 1.02;
  c.fabric.grid_n = 32;
  c.fabric.stretch_stiffness = 50.0;
  c.fabric.shear_stiffness = 8.0;
  c.fabric.bend_stiffness = 2.0;
  c.fabric.damping = 0.015;
  c.sim.physics_dt = 1.0 / 1200.0;
  c.sim.contact_stiffness = 200.0;
  finalize(c);
  return c;
}

// ---------------------------------------------------------------------------
// Document I/O (JSON schema; see docs in README)

namespace detail {

using json = nlohmann::json;

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number())
    throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

template <typename T, typename F>
void take(json& section, const std::string& section_name,
          const std::string& key, T& field, F convert) {
  auto it = section.find(key);
  if (it == section.end()) return;
  field = convert(*it, section_name + "." + key);
  section.erase(it);
}

inline void reject_unknown(const json& section, const std::string& name) {
  for (auto it = section.begin(); it != section.end(); ++it)
    throw ConfigError("unknown key \"" + name + "." + it.key() + "\"");
}

inline Shape parse_shape(json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  std::string kind = j.value("kind", "");
  j.erase("kind");
  Shape s;
  auto num = [](const json& v, const std::string& p) {
    return get_number(v, p);
  };
  if (kind == "sphere") {
    double r = 0.0;
    take(j, path, "radius", r, num);
    s = Shape::sphere(r);
  } else if (kind == "box") {
    Vec3 h{};
    take(j, path, "half_x", h.x, num);
    take(j, path, "half_y", h.y, num);
    take(j, path, "half_z", h.z, num);
    s = Shape::box(h.x, h.y, h.z);
  } else if (kind == "cylinder") {
    double r = 0.0, hh = 0.0;
    take(j, path, "radius", r, num);
    take(j, path, "half_height", hh, num);
    s = Shape::cylinder(r, hh);
  } else if (kind == "ellipsoid") {
    Vec3 a{};
    take(j, path, "axis_x", a.x, num);
    take(j, path, "axis_y", a.y, num);
    take(j, path, "axis_z", a.z, num);
    s = Shape::ellipsoid(a.x, a.y, a.z);
  } else {
    throw ConfigError(path + ".kind: expected one of sphere, box, cylinder, "
                      "ellipsoid");
  }
  reject_unknown(j, path);
  return s;
}

inline json shape_to_json(const Shape& s) {
  json j;
  j["kind"] = shape_kind_name(s.kind);
  switch (s.kind) {
    case ShapeKind::Sphere:
      j["radius"] = s.dims.x;
      break;
    case ShapeKind::Box:
      j["half_x"] = s.dims.x;
      j["half_y"] = s.dims.y;
      j["half_z"] = s.dims.z;
      break;
    case ShapeKind::Cylinder:
      j["radius"] = s.dims.x;
      j["half_height"] = s.dims.z;
      break;
    case ShapeKind::Ellipsoid:
      j["axis_x"] = s.dims.x;
      j["axis_y"] = s.dims.y;
      j["axis_z"] = s.dims.z;
      break;
  }
  return j;
}

}  // namespace detail

inline Config load_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("top level: expected an object");

  Config c;
  auto num = [](const json& v, const std::string& p) {
    return detail::get_number(v, p);
  };

  if (doc.contains("frame")) {
    json sec = doc["frame"];
    doc.erase("frame");
    detail::take(sec, "frame", "frame_side", c.frame.frame_side, num);
    detail::take(sec, "frame", "stroke", c.frame.stroke, num);
    detail::reject_unknown(sec, "frame");
  }
  if (doc.contains("fabric")) {
    json sec = doc["fabric"];
    doc.erase("fabric");
    auto integer = [](const json& v, const std::string& p) {
      if (!v.is_number_integer()) throw ConfigError(p + ": expected an integer");
      return v.get<int>();
    };
    detail::take(sec, "fabric", "fabric_side", c.fabric.fabric_side, num);
    detail::take(sec, "fabric", "grid_n", c.fabric.grid_n, integer);
    detail::take(sec, "fabric", "areal_density", c.fabric.areal_density, num);
    detail::take(sec, "fabric", "stretch_stiffness",
                 c.fabric.stretch_stiffness, num);
    detail::take(sec, "fabric", "shear_stiffness", c.fabric.shear_stiffness,
                 num);
    detail::take(sec, "fabric", "bend_stiffness", c.fabric.bend_stiffness,
                 num);
    detail::take(sec, "fabric", "damping", c.fabric.damping, num);
    detail::reject_unknown(sec, "fabric");
  }
  if (doc.contains("sim")) {
    json sec = doc["sim"];
    doc.erase("sim");
    auto u64 = [](const json& v, const std::string& p) {
      if (!v.is_number_integer()) throw ConfigError(p + ": expected an integer");
      return v.get<uint64_t>();
    };
    detail::take(sec, "sim", "physics_dt", c.sim.physics_dt, num);
    detail::take(sec, "sim", "control_hz", c.sim.control_hz, num);
    detail::take(sec, "sim", "gravity", c.sim.gravity, num);
    detail::take(sec, "sim", "contact_stiffness", c.sim.contact_stiffness,
                 num);
    detail::take(sec, "sim", "contact_damping", c.sim.contact_damping, num);
    detail::take(sec, "sim", "rolling_resistance", c.sim.rolling_resistance,
                 num);
    detail::take(sec, "sim", "seed", c.sim.seed, u64);
    detail::reject_unknown(sec, "sim");
  }
  if (doc.contains("objects")) {
    json arr = doc["objects"];
    doc.erase("objects");
    if (!arr.is_array()) throw ConfigError("objects: expected an array");
    int idx = 0;
    for (auto& item : arr) {
      std::string path = "objects[" + std::to_string(idx++) + "]";
      if (!item.is_object()) throw ConfigError(path + ": expected an object");
      ObjectSpec o;
      if (!item.contains("name"))
        throw ConfigError(path + ".name is required");
      o.name = item["name"].get<std::string>();
      item.erase("name");
      if (!item.contains("shape"))
        throw ConfigError(path + ".shape is required");
      json shape = item["shape"];
      item.erase("shape");
      o.shape = detail::parse_shape(shape, path + ".shape");
      detail::take(item, path, "mass", o.mass, num);
      detail::take(item, path, "friction", o.friction, num);
      if (item.contains("inertia")) {
        json in = item["inertia"];
        item.erase("inertia");
        if (!in.is_array() || in.size() != 3)
          throw ConfigError(path + ".inertia: expected an array of 3 numbers");
        o.inertia_override = Vec3{in[0].get<double>(), in[1].get<double>(),
                                  in[2].get<double>()};
      }
      detail::reject_unknown(item, path);
      c.objects.push_back(o);
    }
  }
  detail::reject_unknown(doc, "top level");
  finalize(c);
  return c;
}

inline std::string serialize_config(const Config& c) {
  using detail::json;
  json doc;
  doc["frame"] = {{"frame_side", c.frame.frame_side}, {"stroke", c.frame.stroke}};
  doc["fabric"] = {{"fabric_side", c.fabric.fabric_side},
                   {"grid_n", c.fabric.grid_n},
                   {"areal_density", c.fabric.areal_density},
                   {"stretch_stiffness", c.fabric.stretch_stiffness},
                   {"shear_stiffness", c.fabric.shear_stiffness},
                   {"bend_stiffness", c.fabric.bend_stiffness},
                   {"damping", c.fabric.damping}};
  doc["sim"] = {{"physics_dt", c.sim.physics_dt},
                {"control_hz", c.sim.control_hz},
                {"gravity", c.sim.gravity},
                {"contact_stiffness", c.sim.contact_stiffness},
                {"contact_damping", c.sim.contact_damping},
                {"rolling_resistance", c.sim.rolling_resistance},
                {"seed", c.sim.seed}};
  json objs = json::array();
  for (const auto& o : c.objects) {
    json jo;
    jo["name"] = o.name;
    jo["shape"] = detail::shape_to_json(o.shape);
    jo["mass"] = o.mass;
    jo["friction"] = o.friction;
    if (o.inertia_override)
      jo["inertia"] = {o.inertia_override->x, o.inertia_override->y,
                       o.inertia_override->z};
    objs.push_back(jo);
  }
  doc["objects"] = objs;
  return doc.dump(2);
}

// FNV-1a over the canonical serialization; embedded in every emitted file.
inline uint64_t config_hash(const Config& c) {
  std::string s = serialize_config(c);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace softsurf

#endif  // SOFTSURF_CONFIG_HPP_
