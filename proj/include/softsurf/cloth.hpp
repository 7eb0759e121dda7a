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

#ifndef SOFTSURF_CLOTH_HPP_
#define SOFTSURF_CLOTH_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "softsurf/config.hpp"
#include "softsurf/errors.hpp"
#include "softsurf/math.hpp"

namespace softsurf {

enum class SpringKind { Stretch, Shear, Bend };

struct Spring {
  int a = 0;
  int b = 0;
  double rest_length = 0.0;  // m
  double stiffness = 0.0;    // N/m
  SpringKind kind = SpringKind::Stretch;
};

struct SpringSet {
  std::vector<Spring> springs;
};

struct ClothState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::array<int, 4> pinned{};  // grid corners, actuator order
  double particle_mass = 0.0;   // kg
  int grid_n = 0;

  int particle_count() const { return static_cast<int>(positions.size()); }
};

// Linear spring with dashpot:
//   F_a = -k (|d| - L0) d_hat - c ((v_a - v_b) . d_hat) d_hat,  d = x_a - x_b
// Forces are accumulated into `forces`, which the caller zeroes.
inline void accumulate_spring_forces(const std::vector<Vec3>& positions,
                                     const std::vector<Vec3>& velocities,
                                     const std::vector<Spring>& springs,
                                     double damping,
                                     std::vector<Vec3>& forces) {
  for (size_t s = 0; s < springs.size(); ++s) {
    const Spring& sp = springs[s];
    Vec3 d = positions[sp.a] - positions[sp.b];
    double len = d.norm();
    if (len < 1e-12)
      throw SimError("coincident particles on spring " + std::to_string(s) +
                     " (" + std::to_string(sp.a) + "," + std::to_string(sp.b) +
                     ")");
    Vec3 dir = d / len;
    double rel = (velocities[sp.a] - velocities[sp.b]).dot(dir);
    double mag = -sp.stiffness * (len - sp.rest_length) - damping * rel;
    Vec3 f = dir * mag;
    forces[sp.a] += f;
    forces[sp.b] -= f;
  }
}

inline std::vector<Vec3> spring_forces(const ClothState& state,
                                       const SpringSet& springs,
                                       double damping) {
  std::vector<Vec3> forces(state.positions.size(), Vec3{});
  accumulate_spring_forces(state.positions, state.velocities, springs.springs,
                           damping, forces);
  return forces;
}

// Semi-implicit Euler on free particles; pinned particles are kinematic and
// report the finite-difference velocity of their commanded motion so the
// cloth feels actuator movement.
inline void integrate_cloth_inplace(ClothState& state,
                                    const std::vector<Vec3>& forces,
                                    double dt, double gravity,
                                    const std::array<Vec3, 4>& pinned_targets) {
  const double inv_m = 1.0 / state.particle_mass;
  const Vec3 g{0.0, 0.0, -gravity};
  const int n = state.particle_count();
  std::array<Vec3, 4> pin_prev;
  for (int k = 0; k < 4; ++k) pin_prev[k] = state.positions[state.pinned[k]];
  for (int i = 0; i < n; ++i) {
    if (!forces[i].finite())
      throw DivergenceError("non-finite force on particle " +
                            std::to_string(i));
    Vec3& v = state.velocities[i];
    Vec3& x = state.positions[i];
    v += (forces[i] * inv_m + g) * dt;
    x += v * dt;
  }
  for (int k = 0; k < 4; ++k) {
    int i = state.pinned[k];
    state.velocities[i] = (pinned_targets[k] - pin_prev[k]) / dt;
    state.positions[i] = pinned_targets[k];
  }
}

inline ClothState integrate_cloth(const ClothState& state,
                                  const std::vector<Vec3>& forces, double dt,
                                  double gravity,
                                  const std::array<Vec3, 4>& pinned_targets) {
  if (!(dt > 0.0)) throw SimError("integrate_cloth: dt > 0 required");
  ClothState next = state;
  integrate_cloth_inplace(next, forces, dt, gravity, pinned_targets);
  return next;
}

// Lays the fabric out flat at height zero, uniformly compressed onto the
// frame square so the grid corners land exactly on the frame corners. Rest
// lengths keep the true fabric dimensions; the first settle pass releases
// the slack into sag. (Snapping only the corners of a full-size flat sheet
// can drop a corner exactly onto an interior particle when the overhang is
// a multiple of the spacing, which degenerates the corner springs.)
inline std::pair<ClothState, SpringSet> build_cloth(const FabricConfig& fabric,
                                                    const FrameConfig& frame) {
  validate(fabric);
  validate(frame);
  const int n = fabric.grid_n;
  const double spacing = fabric.spacing();
  const double layout = frame.frame_side / (n - 1);

  ClothState state;
  state.grid_n = n;
  state.particle_mass = fabric.particle_mass();
  state.positions.resize(static_cast<size_t>(n) * n);
  state.velocities.assign(static_cast<size_t>(n) * n, Vec3{});
  auto idx = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      state.positions[idx(i, j)] = Vec3{i * layout, j * layout, 0.0};

  // Corner particles in actuator order: (0,0), (n-1,0), (n-1,n-1), (0,n-1).
  state.pinned = {idx(0, 0), idx(n - 1, 0), idx(n - 1, n - 1), idx(0, n - 1)};

  SpringSet set;
  auto add = [&](int a, int b, double rest, double k, SpringKind kind) {
    set.springs.push_back({a, b, rest, k, kind});
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n)
        add(idx(i, j), idx(i + 1, j), spacing, fabric.stretch_stiffness,
            SpringKind::Stretch);
      if (j + 1 < n)
        add(idx(i, j), idx(i, j + 1), spacing, fabric.stretch_stiffness,
            SpringKind::Stretch);
      if (i + 1 < n && j + 1 < n) {
        double diag = spacing * std::sqrt(2.0);
        add(idx(i, j), idx(i + 1, j + 1), diag, fabric.shear_stiffness,
            SpringKind::Shear);
        add(idx(i + 1, j), idx(i, j + 1), diag, fabric.shear_stiffness,
            SpringKind::Shear);
      }
      if (i + 2 < n)
        add(idx(i, j), idx(i + 2, j), 2.0 * spacing, fabric.bend_stiffness,
            SpringKind::Bend);
      if (j + 2 < n)
        add(idx(i, j), idx(i, j + 2), 2.0 * spacing, fabric.bend_stiffness,
            SpringKind::Bend);
    }
  }
  return {state, set};
}

// ---------------------------------------------------------------------------
// Diagnostics

inline double kinetic_energy(const ClothState& state) {
  double e = 0.0;
  for (const auto& v : state.velocities) e += v.norm2();
  return 0.5 * state.particle_mass * e;
}

inline double spring_potential(const ClothState& state,
                               const SpringSet& springs) {
  double e = 0.0;
  for (const auto& sp : springs.springs) {
    double stretch =
        (state.positions[sp.a] - state.positions[sp.b]).norm() -
        sp.rest_length;
    e += 0.5 * sp.stiffness * stretch * stretch;
  }
  return e;
}

inline double gravitational_potential(const ClothState& state,
                                      double gravity) {
  double e = 0.0;
  for (const auto& p : state.positions) e += p.z;
  return state.particle_mass * gravity * e;
}

// Worst-case stiffness incident on a single particle, contact included; the
// startup check rejects configs outside dt < 2 sqrt(m / k).
inline double max_incident_stiffness(const ClothState& state,
                                     const SpringSet& springs,
                                     double contact_stiffness) {
  std::vector<double> sum(state.positions.size(), contact_stiffness);
  for (const auto& sp : springs.springs) {
    sum[sp.a] += sp.stiffness;
    sum[sp.b] += sp.stiffness;
  }
  double worst = 0.0;
  for (double s : sum) worst = std::max(worst, s);
  return worst;
}

inline void check_integration_stability(const ClothState& state,
                                        const SpringSet& springs,
                                        const SimConfig& sim) {
  double k = max_incident_stiffness(state, springs, sim.contact_stiffness);
  if (k <= 0.0) return;
  double bound = 2.0 * std::sqrt(state.particle_mass / k);
  if (sim.physics_dt >= bound)
    throw ConfigError(
        "unstable integration: physics_dt = " + std::to_string(sim.physics_dt) +
        " exceeds the bound 2*sqrt(m/k) = " + std::to_string(bound) +
        "; lower the stiffnesses or the timestep");
}

}  // namespace softsurf

#endif  // SOFTSURF_CLOTH_HPP_
