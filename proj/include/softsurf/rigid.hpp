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

#ifndef SOFTSURF_RIGID_HPP_
#define SOFTSURF_RIGID_HPP_

#include <cmath>
#include <utility>

#include "softsurf/config.hpp"
#include "softsurf/errors.hpp"
#include "softsurf/math.hpp"

namespace softsurf {

struct RigidState {
  Vec3 position;
  Quat orientation = Quat::identity();
  Vec3 linear_velocity;
  Vec3 angular_velocity;  // world frame, rad/s
  ObjectSpec spec;

  // Velocity of the material point currently at world position p.
  Vec3 point_velocity(const Vec3& p) const {
    return linear_velocity + angular_velocity.cross(p - position);
  }

  bool finite() const {
    return position.finite() && orientation.finite() &&
           linear_velocity.finite() && angular_velocity.finite();
  }
};

struct SdfResult {
  double distance = 0.0;  // negative inside
  Vec3 normal;            // outward, unit length
};

namespace detail {

// All shape SDFs are evaluated in the body frame. Ties between equidistant
// features resolve in axis order (x, y, z; radial before axial for the
// cylinder) so the normal is deterministic.
inline SdfResult sdf_sphere(const Vec3& p, double r) {
  double len = p.norm();
  if (len < 1e-15) return {-r, {0.0, 0.0, 1.0}};
  return {len - r, p / len};
}

inline SdfResult sdf_box(const Vec3& p, const Vec3& h) {
  Vec3 q{std::fabs(p.x) - h.x, std::fabs(p.y) - h.y, std::fabs(p.z) - h.z};
  auto sgn = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
  if (q.x > 0.0 || q.y > 0.0 || q.z > 0.0) {
    Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
    double d = outside.norm();
    Vec3 n{sgn(p.x) * outside.x, sgn(p.y) * outside.y, sgn(p.z) * outside.z};
    return {d, n / d};
  }
  double inner = q.x;
  int axis = 0;
  if (q.y > inner) {
    inner = q.y;
    axis = 1;
  }
  if (q.z > inner) {
    inner = q.z;
    axis = 2;
  }
  Vec3 n{};
  if (axis == 0) n = {sgn(p.x), 0.0, 0.0};
  if (axis == 1) n = {0.0, sgn(p.y), 0.0};
  if (axis == 2) n = {0.0, 0.0, sgn(p.z)};
  return {inner, n};
}

inline SdfResult sdf_cylinder(const Vec3& p, double r, double hh) {
  double rad = std::sqrt(p.x * p.x + p.y * p.y);
  Vec3 radial = rad > 1e-15 ? Vec3{p.x / rad, p.y / rad, 0.0}
                            : Vec3{1.0, 0.0, 0.0};
  double dr = rad - r;
  double dz = std::fabs(p.z) - hh;
  double zs = p.z < 0.0 ? -1.0 : 1.0;
  if (dr > 0.0 && dz > 0.0) {
    double d = std::sqrt(dr * dr + dz * dz);
    Vec3 n = radial * dr + Vec3{0.0, 0.0, zs} * dz;
    return {d, n / d};
  }
  if (dr > 0.0) return {dr, radial};
  if (dz > 0.0) return {dz, {0.0, 0.0, zs}};
  if (dr >= dz) return {dr, radial};
  return {dz, {0.0, 0.0, zs}};
}

// Quick near-surface estimate: exact on the surface, first order nearby.
inline SdfResult sdf_ellipsoid(const Vec3& p, const Vec3& a) {
  Vec3 p1{p.x / a.x, p.y / a.y, p.z / a.z};
  Vec3 p2{p.x / (a.x * a.x), p.y / (a.y * a.y), p.z / (a.z * a.z)};
  double k0 = p1.norm();
  double k1 = p2.norm();
  if (k1 < 1e-12)
    return {-std::min(std::min(a.x, a.y), a.z), {0.0, 0.0, 1.0}};
  return {k0 * (k0 - 1.0) / k1, p2 / k1};
}

}  // namespace detail

// Signed distance from a world-space point to the body surface; the normal
// is the unit gradient of the distance field in world coordinates.
inline SdfResult signed_distance(const ObjectSpec& spec,
                                 const RigidState& state, const Vec3& point) {
  Vec3 local = state.orientation.rotate_inverse(point - state.position);
  SdfResult r;
  const Vec3& d = spec.shape.dims;
  switch (spec.shape.kind) {
    case ShapeKind::Sphere:
      r = detail::sdf_sphere(local, d.x);
      break;
    case ShapeKind::Box:
      r = detail::sdf_box(local, d);
      break;
    case ShapeKind::Cylinder:
      r = detail::sdf_cylinder(local, d.x, d.z);
      break;
    case ShapeKind::Ellipsoid:
      r = detail::sdf_ellipsoid(local, d);
      break;
  }
  r.normal = state.orientation.rotate(r.normal);
  return r;
}

// Semi-implicit update: velocities first (world-frame inertia from the
// current orientation, gyroscopic term included), then pose. Gravity is the
// caller's responsibility.
inline RigidState integrate_rigid(const RigidState& body, const Vec3& force,
                                  const Vec3& torque, double dt) {
  if (!(dt > 0.0)) throw SimError("integrate_rigid: dt > 0 required");
  if (!force.finite() || !torque.finite())
    throw DivergenceError("integrate_rigid: non-finite force or torque");

  RigidState next = body;
  Vec3 inertia = body.spec.inertia();
  Mat3 rot = Mat3::rotation(body.orientation);
  Mat3 inertia_world =
      rot * Mat3::diag(inertia) * rot.transposed();
  Mat3 inertia_world_inv =
      rot * Mat3::diag({1.0 / inertia.x, 1.0 / inertia.y, 1.0 / inertia.z}) *
      rot.transposed();

  next.linear_velocity += force * (dt / body.spec.mass);
  Vec3 gyro = body.angular_velocity.cross(inertia_world *
                                          body.angular_velocity);
  next.angular_velocity += inertia_world_inv * ((torque - gyro) * dt);

  next.position += next.linear_velocity * dt;
  const Vec3& w = next.angular_velocity;
  Quat omega{0.0, w.x, w.y, w.z};
  Quat dq = omega * next.orientation;
  next.orientation.w += 0.5 * dq.w * dt;
  next.orientation.x += 0.5 * dq.x * dt;
  next.orientation.y += 0.5 * dq.y * dt;
  next.orientation.z += 0.5 * dq.z * dt;
  next.orientation = next.orientation.normalized();
  return next;
}

}  // namespace softsurf

#endif  // SOFTSURF_RIGID_HPP_
