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

#ifndef SOFTSURF_WORLD_HPP_
#define SOFTSURF_WORLD_HPP_

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

#include "softsurf/actuation.hpp"
#include "softsurf/cloth.hpp"
#include "softsurf/config.hpp"
#include "softsurf/contact.hpp"
#include "softsurf/errors.hpp"
#include "softsurf/math.hpp"
#include "softsurf/rigid.hpp"

namespace softsurf {

enum class Regime { Stationary, Rolling, Sliding, Pulling, Fallen };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Stationary:
      return "Stationary";
    case Regime::Rolling:
      return "Rolling";
    case Regime::Sliding:
      return "Sliding";
    case Regime::Pulling:
      return "Pulling";
    case Regime::Fallen:
      return "Fallen";
  }
  return "Stationary";
}

inline Regime regime_from_name(const std::string& s) {
  if (s == "Stationary") return Regime::Stationary;
  if (s == "Rolling") return Regime::Rolling;
  if (s == "Sliding") return Regime::Sliding;
  if (s == "Pulling") return Regime::Pulling;
  if (s == "Fallen") return Regime::Fallen;
  throw SimError("unknown regime label \"" + s + "\"");
}

struct TrajectorySample {
  double t = 0.0;
  Vec3 object_position;
  Quat object_orientation;
  Vec3 object_velocity;
  Heights4 actuator_heights{};
  Regime regime = Regime::Stationary;
};

struct RegimeThresholds {
  double v_eps = 0.005;    // m/s, below which the object is stationary
  double s_eps = 0.005;    // m/s, contact slip below which motion is pulling
  double roll_eps = 0.2;   // relative rolling-consistency tolerance
  double window = 0.25;    // s of trailing samples per decision
};

// One classifier observation per control step.
struct MotionSample {
  double t = 0.0;
  Vec3 velocity;
  Vec3 angular_velocity;
  Vec3 position;
  int contact_count = 0;
  double mean_slip = 0.0;
  Vec3 contact_centroid;   // patch average
  Vec3 contact_pivot;      // deepest contact: the rolling pivot
  double bounding_radius = 0.0;
};

// Regime taxonomy over a trailing window:
//   Stationary - mean speed below v_eps.
//   Pulling    - the object travels with the fabric: negligible slip at the
//                contact patch AND negligible surface speed from rotation
//                (pure rolling also has zero slip, so slip alone cannot
//                separate the two).
//   Rolling    - angular velocity kinematically consistent with rolling
//                about the contact centroid.
//   Sliding    - everything else.
inline Regime classify_motion(const std::vector<MotionSample>& window,
                              const RegimeThresholds& th) {
  if (window.size() < 2)
    throw SimError("classify_motion: insufficient window");
  double span = window.back().t - window.front().t;
  if (span + 1e-9 < th.window)
    throw SimError("classify_motion: insufficient window");

  double speed_sum = 0.0;
  double slip_sum = 0.0;
  double spin_surface_sum = 0.0;
  double mismatch_sum = 0.0;
  bool contact_everywhere = true;
  for (const auto& s : window) {
    speed_sum += s.velocity.norm();
    spin_surface_sum += s.angular_velocity.norm() * s.bounding_radius;
    if (s.contact_count > 0) {
      slip_sum += s.mean_slip;
      Vec3 lever = s.position - s.contact_pivot;
      mismatch_sum += (s.velocity - s.angular_velocity.cross(lever)).norm();
    } else {
      contact_everywhere = false;
      mismatch_sum += s.velocity.norm();
    }
  }
  const double n = static_cast<double>(window.size());
  double mean_speed = speed_sum / n;
  if (mean_speed < th.v_eps) return Regime::Stationary;
  if (contact_everywhere && slip_sum / n < th.s_eps &&
      spin_surface_sum / n < th.s_eps)
    return Regime::Pulling;
  if (mismatch_sum / n < th.roll_eps * mean_speed) return Regime::Rolling;
  return Regime::Sliding;
}

// The object has left the manipulable region when it sits below the fabric
// by more than its bounding radius plus 5 cm, or past the frame square by
// more than a 10 cm margin.
inline bool fall_check(double frame_side, double bounding_radius,
                       double min_cloth_z, const Vec3& body_position) {
  if (body_position.z < min_cloth_z - bounding_radius - 0.05) return true;
  const double margin = 0.1;
  return body_position.x < -margin || body_position.x > frame_side + margin ||
         body_position.y < -margin || body_position.y > frame_side + margin;
}

// Deterministic stepped world: cloth + one rigid object + four actuators.
// A fixed (config, object, reset inputs, action sequence) reproduces the
// trajectory bit for bit; there is no hidden global state.
class World {
 public:
  World(const Config& config, const ObjectSpec& object)
      : cfg_(config), object_(object) {
    validate(object_);
    auto [cloth, springs] = build_cloth(cfg_.fabric, cfg_.frame);
    cloth_ = std::move(cloth);
    springs_ = std::move(springs);
    check_integration_stability(cloth_, springs_, cfg_.sim);
    bank_.stroke = cfg_.frame.stroke;
    forces_.assign(cloth_.positions.size(), Vec3{});
    contact_scratch_.assign(cloth_.positions.size(), Vec3{});
    sampler_ = ContactSampler::for_grid(cloth_.grid_n);
    body_.spec = object_;
    substeps_ = cfg_.sim.substeps_per_control();
  }

  // Settles the cloth under gravity at a level actuator height, then drops
  // the object 2 cm above the surface and lets it come to rest. Velocities
  // are rescaled during the pre-roll to accelerate settling; a short
  // undamped tail confirms the rest state under plain dynamics. A settled
  // cloth template (from settled_cloth()) skips the pre-roll, which makes
  // repeated resets cheap.
  void reset(const Vec2& object_xy, double initial_height,
             const ClothState* cloth_template = nullptr) {
    const double side = cfg_.frame.frame_side;
    if (object_xy.x < 0.0 || object_xy.x > side || object_xy.y < 0.0 ||
        object_xy.y > side)
      throw SimError("reset: object placement outside frame");
    initial_height = clamp(initial_height, 0.0, cfg_.frame.stroke);

    bank_.heights.fill(initial_height);
    bank_.targets.fill(initial_height);
    if (cloth_template) {
      if (cloth_template->grid_n != cfg_.fabric.grid_n)
        throw SimError("reset: cloth template resolution mismatch");
      cloth_ = *cloth_template;
    } else {
      auto [cloth, springs] = build_cloth(cfg_.fabric, cfg_.frame);
      cloth_ = std::move(cloth);
      springs_ = std::move(springs);
      for (auto& p : cloth_.positions) p.z = initial_height;
      settle_cloth(1e-6, 20.0);
    }
    place_object(object_xy);
    settle_object(1e-3, 20.0);

    physics_steps_ = 0;
    fallen_ = false;
    regime_ = Regime::Stationary;
    regime_since_ = 0.0;
    window_.clear();
    peak_pin_force_ = 0.0;
  }

  // Pre-settled object-free cloth at the given level actuator height.
  ClothState settled_cloth(double initial_height) {
    World scratch(cfg_, object_);
    scratch.bank_.heights.fill(initial_height);
    scratch.bank_.targets.fill(initial_height);
    for (auto& p : scratch.cloth_.positions) p.z = initial_height;
    scratch.settle_cloth(1e-6, 20.0);
    return scratch.cloth_;
  }

  // One control step: clamp the commanded heights, then run the physics
  // substeps (servo -> forces -> integrate), then fall check and regime
  // update.
  void step(const Heights4& action) {
    for (double a : action)
      if (!std::isfinite(a)) throw SimError("step: non-finite action");
    bank_.set_targets(action);
    for (int s = 0; s < substeps_; ++s) substep();

    if (!body_.finite() || !cloth_finite())
      throw DivergenceError("world diverged at control step " +
                            std::to_string(control_steps()));

    if (!fallen_ && fall_check()) {
      fallen_ = true;
      regime_ = Regime::Fallen;
    }
    push_motion_sample();
    if (!fallen_) update_regime();
  }

  bool fall_check() const {
    if (fallen_) return true;
    double min_z = cloth_.positions[0].z;
    for (const auto& p : cloth_.positions) min_z = std::min(min_z, p.z);
    return softsurf::fall_check(cfg_.frame.frame_side,
                                object_.shape.bounding_radius(), min_z,
                                body_.position);
  }

  TrajectorySample sample() const {
    TrajectorySample s;
    s.t = time();
    s.object_position = body_.position;
    s.object_orientation = body_.orientation;
    s.object_velocity = body_.linear_velocity;
    s.actuator_heights = bank_.heights;
    s.regime = fallen_ ? Regime::Fallen : regime_;
    return s;
  }

  double time() const { return physics_steps_ * cfg_.sim.physics_dt; }
  long long control_steps() const { return physics_steps_ / substeps_; }
  bool fallen() const { return fallen_; }
  Regime regime() const { return fallen_ ? Regime::Fallen : regime_; }
  const Config& config() const { return cfg_; }
  const ObjectSpec& object() const { return object_; }
  const ClothState& cloth() const { return cloth_; }
  const SpringSet& springs() const { return springs_; }
  const RigidState& body() const { return body_; }
  const ActuatorBank& bank() const { return bank_; }
  const ContactStats& last_contact() const { return last_contact_; }
  RegimeThresholds& thresholds() { return thresholds_; }
  // Peak force any pin had to resist so far; the hardware actuator is good
  // for about 11.6 N.
  double peak_pin_force() const { return peak_pin_force_; }

  // Height of the settled fabric surface under (x, y), from the nearest
  // particle column.
  double surface_height(const Vec2& xy) const {
    double best_d2 = 1e30;
    double z = 0.0;
    for (const auto& p : cloth_.positions) {
      double dx = p.x - xy.x, dy = p.y - xy.y;
      double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        z = p.z;
      }
    }
    return z;
  }

 private:
  void substep() {
    const double dt = cfg_.sim.physics_dt;
    bank_ = servo_step(bank_, dt);
    std::array<Vec3, 4> pins = pin_targets();

    std::fill(forces_.begin(), forces_.end(), Vec3{});
    accumulate_spring_forces(cloth_.positions, cloth_.velocities,
                             springs_.springs, cfg_.fabric.damping, forces_);
    for (int k = 0; k < 4; ++k) {
      double f = forces_[cloth_.pinned[k]].norm() +
                 cloth_.particle_mass * cfg_.sim.gravity;
      peak_pin_force_ = std::max(peak_pin_force_, f);
    }
    last_contact_ = accumulate_contact_forces_sampled(
        cloth_.positions, cloth_.velocities, sampler_, body_,
        cfg_.sim.contact_stiffness, cfg_.sim.contact_damping, object_.friction,
        cloth_.particle_mass, dt, forces_, contact_scratch_);

    integrate_cloth_inplace(cloth_, forces_, dt, cfg_.sim.gravity, pins);
    Vec3 body_force = last_contact_.body_force +
                      Vec3{0.0, 0.0, -cfg_.sim.gravity * object_.mass};
    Vec3 body_torque = last_contact_.body_torque;
    // Deformation hysteresis of the fabric resists rolling; without it the
    // object rings in the sag pocket indefinitely.
    double spin = body_.angular_velocity.norm();
    if (last_contact_.contact_count > 0 && spin > 1e-9) {
      double mag = cfg_.sim.rolling_resistance *
                   last_contact_.normal_force_sum *
                   object_.shape.bounding_radius();
      body_torque -= body_.angular_velocity * (mag / spin);
    }
    body_ = integrate_rigid(body_, body_force, body_torque, dt);
    ++physics_steps_;
  }

  std::array<Vec3, 4> pin_targets() const {
    auto corners = cfg_.frame.corner_xy();
    std::array<Vec3, 4> pins;
    for (int k = 0; k < 4; ++k)
      pins[k] = Vec3{corners[k].x, corners[k].y, bank_.heights[k]};
    return pins;
  }

  bool cloth_finite() const {
    for (const auto& p : cloth_.positions)
      if (!p.finite()) return false;
    for (const auto& v : cloth_.velocities)
      if (!v.finite()) return false;
    return true;
  }

  void push_motion_sample() {
    MotionSample m;
    m.t = time();
    m.velocity = body_.linear_velocity;
    m.angular_velocity = body_.angular_velocity;
    m.position = body_.position;
    m.contact_count = last_contact_.contact_count;
    m.mean_slip = last_contact_.mean_slip;
    m.contact_centroid = last_contact_.contact_centroid;
    m.contact_pivot = last_contact_.deepest_point;
    m.bounding_radius = object_.shape.bounding_radius();
    window_.push_back(m);
    double horizon = thresholds_.window + 1e-9;
    while (window_.size() > 2 &&
           window_.back().t - window_[1].t >= horizon)
      window_.pop_front();
  }

  // Regime changes are rate limited to one per window length so the label
  // cannot chatter faster than the evidence supporting it.
  void update_regime() {
    double span =
        window_.empty() ? 0.0 : window_.back().t - window_.front().t;
    if (span + 1e-9 < thresholds_.window) return;
    std::vector<MotionSample> w(window_.begin(), window_.end());
    Regime next = classify_motion(w, thresholds_);
    if (next != regime_ && time() - regime_since_ >= thresholds_.window) {
      regime_ = next;
      regime_since_ = time();
    }
  }

  void settle_cloth(double kinetic_tol, double max_sim_time) {
    const double dt = cfg_.sim.physics_dt;
    std::array<Vec3, 4> pins = pin_targets();
    long long max_steps = static_cast<long long>(max_sim_time / dt);
    for (long long i = 0; i < max_steps; ++i) {
      std::fill(forces_.begin(), forces_.end(), Vec3{});
      accumulate_spring_forces(cloth_.positions, cloth_.velocities,
                               springs_.springs, cfg_.fabric.damping, forces_);
      integrate_cloth_inplace(cloth_, forces_, dt, cfg_.sim.gravity, pins);
      for (auto& v : cloth_.velocities) v *= 0.995;
      if (i % 50 == 49 && kinetic_energy(cloth_) < kinetic_tol) return;
    }
    if (kinetic_energy(cloth_) >= kinetic_tol)
      throw SimError("reset: cloth failed to settle");
  }

  void place_object(const Vec2& xy) {
    body_ = RigidState{};
    body_.spec = object_;
    double z = surface_height(xy);
    body_.position =
        Vec3{xy.x, xy.y, z + object_.shape.bottom_extent() + 0.02};
  }

  void settle_object(double velocity_tol, double max_sim_time) {
    const double dt = cfg_.sim.physics_dt;
    long long max_steps = static_cast<long long>(max_sim_time / dt);
    long long tail = static_cast<long long>(0.25 / dt);
    long long quiet = 0;
    for (long long i = 0; i < max_steps; ++i) {
      substep();
      physics_steps_ = 0;  // reset() time starts after settling
      bool damped_phase = quiet == 0;
      if (damped_phase) {
        for (auto& v : cloth_.velocities) v *= 0.999;
        body_.linear_velocity *= 0.999;
        body_.angular_velocity *= 0.999;
        if (body_.linear_velocity.norm() < 0.5 * velocity_tol) quiet = 1;
      } else {
        ++quiet;
        if (quiet > tail) {
          if (body_.linear_velocity.norm() < velocity_tol) return;
          quiet = 0;  // still moving after the undamped tail; damp again
        }
      }
    }
    throw SimError("reset: object failed to settle");
  }

  Config cfg_;
  ObjectSpec object_;
  ClothState cloth_;
  SpringSet springs_;
  RigidState body_;
  ActuatorBank bank_;
  ContactSampler sampler_;
  ContactStats last_contact_;
  RegimeThresholds thresholds_;
  std::vector<Vec3> forces_;
  std::vector<Vec3> contact_scratch_;
  std::deque<MotionSample> window_;
  Regime regime_ = Regime::Stationary;
  double regime_since_ = 0.0;
  double peak_pin_force_ = 0.0;
  long long physics_steps_ = 0;
  int substeps_ = 1;
  bool fallen_ = false;
};

}  // namespace softsurf

#endif  // SOFTSURF_WORLD_HPP_
