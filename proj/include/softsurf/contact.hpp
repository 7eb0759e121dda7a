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

#ifndef SOFTSURF_CONTACT_HPP_
#define SOFTSURF_CONTACT_HPP_

#include <vector>

#include "softsurf/cloth.hpp"
#include "softsurf/math.hpp"
#include "softsurf/rigid.hpp"

namespace softsurf {

// Per-step contact summary; feeds the motion classifier.
struct ContactStats {
  int contact_count = 0;
  double mean_slip = 0.0;       // m/s, tangential, body surface vs particle
  Vec3 contact_centroid;        // world, valid when contact_count > 0
  double max_penetration = 0.0; // m
  Vec3 body_force;              // net force applied to the body
  Vec3 body_torque;             // about the body center of mass
  Vec3 deepest_point;           // sample with the largest penetration
  double normal_force_sum = 0.0;    // sum of per-contact normal magnitudes
  double friction_force_sum = 0.0;  // sum of per-contact friction magnitudes
};

// Penalty contact sampled at cloth particles. Each penetrating particle gets
// a normal penalty force with damping plus a regularized Coulomb friction
// force; the body receives the exact negation, so action-reaction holds to
// the last bit. The friction magnitude is capped both by the Coulomb cone
// mu * |Fn| and by the impulse m |v_t| / dt that would cancel the slip in a
// single step, which keeps the stick regime stable under explicit
// integration.
inline ContactStats accumulate_contact_forces(
    const std::vector<Vec3>& positions, const std::vector<Vec3>& velocities,
    const RigidState& body, double contact_stiffness, double contact_damping,
    double friction_mu, double particle_mass, double dt,
    std::vector<Vec3>& forces) {
  ContactStats stats;
  Vec3 centroid_sum;
  double slip_sum = 0.0;
  const size_t n = positions.size();
  for (size_t i = 0; i < n; ++i) {
    SdfResult sd = signed_distance(body.spec, body, positions[i]);
    if (sd.distance >= 0.0) continue;
    double depth = -sd.distance;
    const Vec3& normal = sd.normal;

    Vec3 v_rel = velocities[i] - body.point_velocity(positions[i]);
    double v_n = v_rel.dot(normal);
    double normal_mag = contact_stiffness * depth - contact_damping * v_n;
    if (normal_mag < 0.0) normal_mag = 0.0;  // no adhesion

    Vec3 v_t = v_rel - normal * v_n;
    double slip = v_t.norm();
    Vec3 friction{};
    double friction_mag = 0.0;
    if (slip > 1e-12) {
      double cone = friction_mu * normal_mag;
      double stick = particle_mass * slip / dt;
      friction_mag = cone < stick ? cone : stick;
      friction = v_t * (-friction_mag / slip);
    }

    Vec3 particle_force = normal * normal_mag + friction;
    forces[i] += particle_force;
    stats.body_force -= particle_force;
    stats.body_torque -= (positions[i] - body.position).cross(particle_force);

    ++stats.contact_count;
    slip_sum += slip;
    centroid_sum += positions[i];
    stats.normal_force_sum += normal_mag;
    stats.friction_force_sum += friction_mag;
    if (depth > stats.max_penetration) {
      stats.max_penetration = depth;
      stats.deepest_point = positions[i];
    }
  }
  if (stats.contact_count > 0) {
    stats.mean_slip = slip_sum / stats.contact_count;
    stats.contact_centroid = centroid_sum / stats.contact_count;
  }
  return stats;
}

// Contact sample points on the cloth surface: every particle, every spring
// edge midpoint, and every cell center. A force at an interpolated point is
// distributed to its member particles with the interpolation weights, which
// transfers force and torque to the cloth exactly (the weighted application
// points average back to the sample point). Thin objects like the disk rest
// on the interpolated surface instead of balancing on a single particle.
struct ContactSample {
  std::array<int, 4> members{};
  int count = 1;
};

struct ContactSampler {
  std::vector<ContactSample> samples;

  static ContactSampler for_grid(int grid_n) {
    ContactSampler s;
    auto idx = [grid_n](int i, int j) { return j * grid_n + i; };
    for (int j = 0; j < grid_n; ++j)
      for (int i = 0; i < grid_n; ++i) {
        ContactSample p;
        p.members[0] = idx(i, j);
        p.count = 1;
        s.samples.push_back(p);
        if (i + 1 < grid_n) {
          ContactSample e;
          e.members = {idx(i, j), idx(i + 1, j), 0, 0};
          e.count = 2;
          s.samples.push_back(e);
        }
        if (j + 1 < grid_n) {
          ContactSample e;
          e.members = {idx(i, j), idx(i, j + 1), 0, 0};
          e.count = 2;
          s.samples.push_back(e);
        }
        if (i + 1 < grid_n && j + 1 < grid_n) {
          ContactSample c;
          c.members = {idx(i, j), idx(i + 1, j), idx(i, j + 1),
                       idx(i + 1, j + 1)};
          c.count = 4;
          s.samples.push_back(c);
        }
      }
    return s;
  }
};

// Sampled-surface variant. Contact shares are accumulated into
// `contact_scratch` (zeroed here) and then folded into `forces`; the body
// force is the exact negation of the per-particle contact force sum, so the
// momentum bookkeeping holds bit for bit.
inline ContactStats accumulate_contact_forces_sampled(
    const std::vector<Vec3>& positions, const std::vector<Vec3>& velocities,
    const ContactSampler& sampler, const RigidState& body,
    double contact_stiffness, double contact_damping, double friction_mu,
    double particle_mass, double dt, std::vector<Vec3>& forces,
    std::vector<Vec3>& contact_scratch) {
  ContactStats stats;
  Vec3 centroid_sum;
  double slip_sum = 0.0;
  // Four samples per cell (particle, 2 edges, center): each carries a
  // quarter of the interface stiffness so a given penetration produces the
  // same total force as particle-only sampling.
  const double k_s = 0.25 * contact_stiffness;
  const double c_s = 0.25 * contact_damping;
  std::fill(contact_scratch.begin(), contact_scratch.end(), Vec3{});
  for (const auto& sample : sampler.samples) {
    Vec3 point{}, velocity{};
    for (int k = 0; k < sample.count; ++k) {
      point += positions[sample.members[k]];
      velocity += velocities[sample.members[k]];
    }
    point = point / sample.count;
    velocity = velocity / sample.count;

    SdfResult sd = signed_distance(body.spec, body, point);
    if (sd.distance >= 0.0) continue;
    double depth = -sd.distance;
    const Vec3& normal = sd.normal;

    Vec3 v_rel = velocity - body.point_velocity(point);
    double v_n = v_rel.dot(normal);
    double normal_mag = k_s * depth - c_s * v_n;
    if (normal_mag < 0.0) normal_mag = 0.0;

    Vec3 v_t = v_rel - normal * v_n;
    double slip = v_t.norm();
    Vec3 friction{};
    double friction_mag = 0.0;
    if (slip > 1e-12) {
      double cone = friction_mu * normal_mag;
      // Effective mass of the interpolated point is count * particle mass;
      // the quarter weight keeps the per-particle impulse bounded.
      double stick = 0.25 * sample.count * particle_mass * slip / dt;
      friction_mag = cone < stick ? cone : stick;
      friction = v_t * (-friction_mag / slip);
    }

    Vec3 f = normal * normal_mag + friction;
    Vec3 share = f / sample.count;
    for (int k = 0; k < sample.count; ++k)
      contact_scratch[sample.members[k]] += share;
    stats.body_torque -= (point - body.position).cross(f);

    ++stats.contact_count;
    slip_sum += slip;
    centroid_sum += point;
    stats.normal_force_sum += normal_mag;
    stats.friction_force_sum += friction_mag;
    if (depth > stats.max_penetration) {
      stats.max_penetration = depth;
      stats.deepest_point = point;
    }
  }
  Vec3 total{};
  for (size_t i = 0; i < contact_scratch.size(); ++i) {
    total += contact_scratch[i];
    forces[i] += contact_scratch[i];
  }
  stats.body_force = -total;
  if (stats.contact_count > 0) {
    stats.mean_slip = slip_sum / stats.contact_count;
    stats.contact_centroid = centroid_sum / stats.contact_count;
  }
  return stats;
}

struct ContactForces {
  std::vector<Vec3> particle_forces;
  Vec3 body_force;
  Vec3 body_torque;
  ContactStats stats;
};

inline ContactForces contact_forces(const ClothState& cloth,
                                    const RigidState& body,
                                    double contact_stiffness,
                                    double contact_damping, double friction_mu,
                                    double dt) {
  if (!(contact_stiffness > 0.0))
    throw SimError("contact_forces: contact_stiffness > 0 required");
  ContactForces out;
  out.particle_forces.assign(cloth.positions.size(), Vec3{});
  out.stats = accumulate_contact_forces(
      cloth.positions, cloth.velocities, body, contact_stiffness,
      contact_damping, friction_mu, cloth.particle_mass, dt,
      out.particle_forces);
  out.body_force = out.stats.body_force;
  out.body_torque = out.stats.body_torque;
  return out;
}

}  // namespace softsurf

#endif  // SOFTSURF_CONTACT_HPP_
