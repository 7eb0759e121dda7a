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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "softsurf/cloth.hpp"
#include "softsurf/config.hpp"
#include "softsurf/contact.hpp"
#include "softsurf/rigid.hpp"

using namespace softsurf;

namespace {

RigidState make_body(const ObjectSpec& spec, const Vec3& pos) {
  RigidState b;
  b.spec = spec;
  b.position = pos;
  return b;
}

ObjectSpec catalog(const std::string& name) {
  return find_object(object_catalog(), name);
}

}  // namespace

TEST_CASE("sphere SDF: radial distance and normal") {
  auto body = make_body(catalog("sphere"), {0, 0, 0});
  SdfResult r = signed_distance(body.spec, body, {0.03, 0, 0});
  CHECK(r.distance == doctest::Approx(0.0045));
  CHECK(r.normal.x == doctest::Approx(1.0));
  CHECK(r.normal.y == doctest::Approx(0.0));

  // Inside, near the bottom: normal points outward (down).
  SdfResult inside = signed_distance(body.spec, body, {0.0, 0.0, -0.02});
  CHECK(inside.distance == doctest::Approx(-0.0055));
  CHECK(inside.normal.z == doctest::Approx(-1.0));
}

TEST_CASE("box SDF: center, faces, corner, tie-break") {
  auto body = make_body(catalog("cube"), {0, 0, 0});
  SdfResult center = signed_distance(body.spec, body, {0, 0, 0});
  CHECK(center.distance == doctest::Approx(-0.025));
  CHECK(center.normal.x == 1.0);  // axis-ordered deterministic tie-break

  SdfResult face = signed_distance(body.spec, body, {0.04, 0, 0});
  CHECK(face.distance == doctest::Approx(0.015));
  CHECK(face.normal.x == doctest::Approx(1.0));

  SdfResult corner = signed_distance(body.spec, body, {0.035, 0.035, 0.035});
  CHECK(corner.distance == doctest::Approx(std::sqrt(3.0) * 0.01));
  CHECK(corner.normal.x == doctest::Approx(1.0 / std::sqrt(3.0)));

  SdfResult inside = signed_distance(body.spec, body, {0.0, 0.02, -0.01});
  CHECK(inside.distance == doctest::Approx(-0.005));
  CHECK(inside.normal.y == doctest::Approx(1.0));
}

TEST_CASE("box SDF respects orientation") {
  auto spec = catalog("cube");
  RigidState b = make_body(spec, {0, 0, 0});
  b.orientation = Quat::from_axis_angle({0, 0, 1}, kPi / 2.0);
  // +x face normal rotates onto +y.
  SdfResult r = signed_distance(spec, b, {0.0, 0.04, 0.0});
  CHECK(r.distance == doctest::Approx(0.015));
  CHECK(r.normal.y == doctest::Approx(1.0));
  CHECK(std::fabs(r.normal.x) < 1e-12);
}

TEST_CASE("cylinder SDF: radial, axial, rim and interior tie-break") {
  auto body = make_body(catalog("cylinder"), {0, 0, 0});  // r=.0235 hh=.02
  SdfResult radial = signed_distance(body.spec, body, {0.03, 0, 0});
  CHECK(radial.distance == doctest::Approx(0.0065));
  CHECK(radial.normal.x == doctest::Approx(1.0));

  SdfResult axial = signed_distance(body.spec, body, {0, 0, 0.03});
  CHECK(axial.distance == doctest::Approx(0.01));
  CHECK(axial.normal.z == doctest::Approx(1.0));

  SdfResult rim = signed_distance(body.spec, body, {0.0335, 0, 0.03});
  CHECK(rim.distance == doctest::Approx(std::sqrt(2.0) * 0.01));

  // Interior point equidistant from wall and cap picks the radial feature.
  double r = 0.0235;
  SdfResult tie = signed_distance(body.spec, body, {r - 0.01, 0.0, 0.01});
  CHECK(tie.distance == doctest::Approx(-0.01));
  CHECK(tie.normal.x == doctest::Approx(1.0));
}

TEST_CASE("ellipsoid SDF: apex on surface, brute-force oracle nearby") {
  auto spec = catalog("egg");  // axes 0.022, 0.022, 0.031
  auto body = make_body(spec, {0, 0, 0});
  SdfResult apex = signed_distance(spec, body, {0, 0, 0.031});
  CHECK(std::fabs(apex.distance) < 1e-6);

  // Brute-force nearest surface point over a dense parametric sweep.
  auto brute = [&](const Vec3& p) {
    double best = 1e30;
    const int kN = 400;
    for (int i = 0; i <= kN; ++i) {
      double th = kPi * i / kN;
      for (int j = 0; j < kN; ++j) {
        double ph = 2.0 * kPi * j / kN;
        Vec3 s{0.022 * std::sin(th) * std::cos(ph),
               0.022 * std::sin(th) * std::sin(ph), 0.031 * std::cos(th)};
        best = std::min(best, (p - s).norm());
      }
    }
    return best;
  };
  for (const Vec3& probe :
       {Vec3{0, 0, 0.033}, Vec3{0.023, 0, 0}, Vec3{0.015, 0.012, 0.015}}) {
    SdfResult r = signed_distance(spec, body, probe);
    double expected = brute(probe);
    CHECK(std::fabs(std::fabs(r.distance) - expected) <
          0.1 * expected + 1e-4);
  }
}

TEST_CASE("integrate_rigid: identity and gravity steps") {
  auto body = make_body(catalog("sphere"), {0.1, 0.2, 0.3});
  RigidState same = integrate_rigid(body, {0, 0, 0}, {0, 0, 0}, 0.01);
  CHECK((same.position - body.position).norm() == 0.0);
  CHECK(same.linear_velocity.norm() == 0.0);
  CHECK(same.orientation.norm() == doctest::Approx(1.0));

  Vec3 gravity{0, 0, -9.81 * body.spec.mass};
  RigidState dropped = integrate_rigid(body, gravity, {0, 0, 0}, 0.01);
  CHECK(dropped.linear_velocity.z == doctest::Approx(-0.0981));

  CHECK_THROWS_AS(
      integrate_rigid(body, {std::nan(""), 0, 0}, {0, 0, 0}, 0.01),
      DivergenceError);
}

TEST_CASE("integrate_rigid: constant torque spin-up matches tau*t/I") {
  auto spec = catalog("cylinder");
  auto body = make_body(spec, {0, 0, 0});
  const double tau = 1e-3, dt = 1e-4, duration = 1.0;
  const int steps = static_cast<int>(duration / dt);
  for (int i = 0; i < steps; ++i)
    body = integrate_rigid(body, {0, 0, 0}, {0, 0, tau}, dt);
  double expected = tau * duration / spec.inertia().z;
  CHECK(body.angular_velocity.z ==
        doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("quaternion norm drift stays below 1e-9 over 1e6 steps") {
  auto body = make_body(catalog("egg"), {0, 0, 0});
  body.angular_velocity = {3.0, -2.0, 5.0};
  const double dt = 1e-4;
  for (int i = 0; i < 1000000; ++i)
    body = integrate_rigid(body, {0, 0, 0}, {0, 0, 0}, dt);
  CHECK(std::fabs(body.orientation.norm() - 1.0) < 1e-9);
  CHECK(body.finite());
}

TEST_CASE("contact: penalty formula and empty contact") {
  // A single particle 1 mm inside the sphere bottom, everything at rest.
  auto spec = catalog("sphere");
  auto body = make_body(spec, {0, 0, 0});
  std::vector<Vec3> pos{{0.0, 0.0, -(spec.shape.dims.x - 0.001)}};
  std::vector<Vec3> vel{{}};
  std::vector<Vec3> forces(1, Vec3{});
  ContactStats stats = accumulate_contact_forces(
      pos, vel, body, 5000.0, 0.0, 0.3, 3.2e-4, 1.0 / 1200.0, forces);
  CHECK(stats.contact_count == 1);
  CHECK(forces[0].z == doctest::Approx(-5.0));  // pushed out of the body
  CHECK(stats.body_force.z == doctest::Approx(5.0));
  CHECK(stats.normal_force_sum == doctest::Approx(5.0));

  // No penetration, no output.
  std::vector<Vec3> far{{0.0, 0.0, -1.0}};
  std::fill(forces.begin(), forces.end(), Vec3{});
  ContactStats none = accumulate_contact_forces(
      far, vel, body, 5000.0, 0.0, 0.3, 3.2e-4, 1.0 / 1200.0, forces);
  CHECK(none.contact_count == 0);
  CHECK(none.body_force.norm() == 0.0);
  CHECK(forces[0].norm() == 0.0);
}

TEST_CASE("contact: action-reaction is exact, torque consistent") {
  auto spec = catalog("cube");
  RigidState body = make_body(spec, {0.25, 0.25, 0.02});
  body.orientation = Quat::from_axis_angle({0.2, 1.0, 0.1}, 0.3);
  body.linear_velocity = {0.05, -0.02, 0.01};
  body.angular_velocity = {0.4, 0.1, -0.2};

  // A plane of particles crossing the cube.
  std::vector<Vec3> pos, vel;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      pos.push_back({0.22 + 0.003 * i, 0.22 + 0.003 * j, 0.005});
      vel.push_back({0.01 * std::sin(i * 0.9), 0.01 * std::cos(j * 1.1), 0});
    }
  std::vector<Vec3> forces(pos.size(), Vec3{});
  ContactStats stats = accumulate_contact_forces(
      pos, vel, body, 400.0, 0.05, 0.45, 3.2e-4, 1.0 / 1200.0, forces);
  REQUIRE(stats.contact_count > 0);

  Vec3 particle_sum{};
  for (const auto& f : forces) particle_sum += f;
  Vec3 residual = particle_sum + stats.body_force;
  CHECK(residual.x == 0.0);
  CHECK(residual.y == 0.0);
  CHECK(residual.z == 0.0);

  Vec3 torque_sum{};
  for (size_t i = 0; i < pos.size(); ++i)
    torque_sum += (pos[i] - body.position).cross(forces[i]);
  CHECK((torque_sum + stats.body_torque).norm() <=
        1e-9 * stats.body_torque.norm());
}

TEST_CASE("contact: dragged sphere saturates the Coulomb cone at mu") {
  // Sphere resting on a taut, stiff cloth; the body is dragged kinematically
  // at constant velocity and the settled force ratio is read off.
  FabricConfig fabric;
  fabric.fabric_side = 0.5;  // taut: fabric exactly spans the frame
  fabric.grid_n = 26;
  fabric.stretch_stiffness = 2000.0;
  fabric.shear_stiffness = 400.0;
  fabric.bend_stiffness = 50.0;
  fabric.damping = 0.1;
  FrameConfig frame;
  auto [cloth, springs] = build_cloth(fabric, frame);
  std::array<Vec3, 4> pins;
  for (int k = 0; k < 4; ++k) pins[k] = cloth.positions[cloth.pinned[k]];

  ObjectSpec spec = catalog("sphere");
  spec.friction = 0.3;
  RigidState body = make_body(spec, {0.15, 0.25, spec.shape.dims.x - 5e-4});
  body.linear_velocity = {0.1, 0.0, 0.0};

  const double dt = 2.5e-5;
  const double k_c = 3000.0, c_c = 0.05;
  std::vector<Vec3> forces(cloth.positions.size());
  ContactStats stats;
  double ratio = 0.0;
  const int steps = static_cast<int>(1.5 / dt);
  for (int i = 0; i < steps; ++i) {
    std::fill(forces.begin(), forces.end(), Vec3{});
    accumulate_spring_forces(cloth.positions, cloth.velocities,
                             springs.springs, fabric.damping, forces);
    stats = accumulate_contact_forces(cloth.positions, cloth.velocities, body,
                                      k_c, c_c, spec.friction,
                                      cloth.particle_mass, dt, forces);
    integrate_cloth_inplace(cloth, forces, dt, 9.81, pins);
    // Kinematic drag: position advances, velocity stays prescribed. The
    // body also sinks to its equilibrium depth under gravity.
    Vec3 net = stats.body_force + Vec3{0, 0, -9.81 * spec.mass};
    body.position.x += body.linear_velocity.x * dt;
    body.linear_velocity.z += net.z / spec.mass * dt;
    body.position.z += body.linear_velocity.z * dt;
    if (i > steps / 2 && stats.contact_count > 0)
      ratio = stats.friction_force_sum / stats.normal_force_sum;
  }
  REQUIRE(stats.contact_count > 0);
  CHECK(ratio == doctest::Approx(0.3).epsilon(0.01));
}

TEST_CASE("rolling oracle: sphere on a stiff 15 degree incline") {
  // Corners pinned to form a slope, stiffness 100x, mu = 0.5. A solid
  // sphere rolling without slipping accelerates at (5/7) g sin(theta),
  // independent of mass and radius. The test sphere is large relative to
  // the particle spacing so the sampled contact stays continuous (a small
  // sphere rides the discretization washboard and skips: the detachment
  // speed sqrt(8 r g)/2pi does not improve with grid resolution).
  const double theta = 15.0 * kPi / 180.0;
  FabricConfig fabric;
  // Slightly undersized fabric prestresses the membrane; without tension a
  // "taut" sheet has no transverse stiffness and the sphere rolls inside a
  // deep self-made pocket instead of on a plane.
  fabric.fabric_side = 0.48;
  fabric.grid_n = 26;
  fabric.stretch_stiffness = 8000.0;  // 100x default
  fabric.shear_stiffness = 1500.0;
  fabric.bend_stiffness = 400.0;
  fabric.damping = 0.2;
  FrameConfig frame;
  auto [cloth, springs] = build_cloth(fabric, frame);

  const double drop = frame.frame_side * std::tan(theta);
  std::array<Vec3, 4> pins;
  auto corners = frame.corner_xy();
  for (int k = 0; k < 4; ++k) {
    double z = 0.05 + (frame.frame_side - corners[k].x) / frame.frame_side *
                          drop;  // high at x=0, low at x=0.5
    pins[k] = Vec3{corners[k].x, corners[k].y, z};
  }
  // Start from the plane through the pins.
  for (auto& p : cloth.positions)
    p.z = 0.05 + (frame.frame_side - p.x) / frame.frame_side * drop;

  ObjectSpec spec{"ball", Shape::sphere(0.16), 1.0, 0.5, std::nullopt};
  const double r = spec.shape.dims.x;
  Vec3 slope_dir{std::cos(theta), 0.0, -std::sin(theta)};
  Vec3 plane_normal{std::sin(theta), 0.0, std::cos(theta)};

  const double dt = 2.5e-5;
  const double k_c = 5000.0, c_c = 1.0;
  std::vector<Vec3> forces(cloth.positions.size());
  ContactStats stats;

  auto surface_z = [&](double x) {
    return 0.05 + (frame.frame_side - x) / frame.frame_side * drop;
  };
  RigidState body = make_body(
      spec, Vec3{0.13, 0.25, surface_z(0.13)} + plane_normal * (r - 1e-5));

  auto substep = [&](RigidState& b) {
    std::fill(forces.begin(), forces.end(), Vec3{});
    accumulate_spring_forces(cloth.positions, cloth.velocities,
                             springs.springs, fabric.damping, forces);
    stats = accumulate_contact_forces(cloth.positions, cloth.velocities, b,
                                      k_c, c_c, spec.friction,
                                      cloth.particle_mass, dt, forces);
    integrate_cloth_inplace(cloth, forces, dt, 9.81, pins);
    Vec3 f = stats.body_force + Vec3{0, 0, -9.81 * spec.mass};
    b = integrate_rigid(b, f, stats.body_torque, dt);
  };

  // Quasi-static settle until the contact carries the full weight, then
  // release from rest.
  const double static_load = 9.81 * spec.mass * std::cos(theta);
  for (int i = 0; i < 200000; ++i) {
    substep(body);
    body.linear_velocity *= 0.995;
    body.angular_velocity *= 0.995;
    if (i % 2000 == 1999 && body.linear_velocity.norm() < 1e-4 &&
        std::fabs(stats.normal_force_sum - static_load) < 0.05 * static_load)
      break;
  }
  REQUIRE(stats.normal_force_sum ==
          doctest::Approx(static_load).epsilon(0.05));
  body.linear_velocity = {};
  body.angular_velocity = {};
  Vec3 start = body.position;

  const double duration = 0.3;
  const int steps = static_cast<int>(duration / dt);
  for (int i = 0; i < steps; ++i) substep(body);

  double travel = (body.position - start).dot(slope_dir);
  double accel = 2.0 * travel / (duration * duration);
  double expected = (5.0 / 7.0) * 9.81 * std::sin(theta);
  MESSAGE("measured rolling acceleration: ", accel, " expected: ", expected);
  CHECK(accel == doctest::Approx(expected).epsilon(0.10));

  // Rolling, not sliding: surface speed matches translation within 20%.
  double v = body.linear_velocity.norm();
  double w = body.angular_velocity.norm();
  CHECK(w * r == doctest::Approx(v).epsilon(0.2));
}
