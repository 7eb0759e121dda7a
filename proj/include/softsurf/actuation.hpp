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

#ifndef SOFTSURF_ACTUATION_HPP_
#define SOFTSURF_ACTUATION_HPP_

#include <array>
#include <cmath>

#include "softsurf/config.hpp"
#include "softsurf/errors.hpp"
#include "softsurf/math.hpp"

namespace softsurf {

using Heights4 = std::array<double, 4>;

// 120 rpm motor through a 5 cm pulley: 2 rev/s * pi * 0.05 m.
inline constexpr double kDefaultMaxActuatorSpeed = 0.31415926535897931;

// Four height servos at the frame corners, modeled as rate-limited tracking
// toward commanded targets. Heights stay inside [0, stroke] and never move
// faster than max_speed.
struct ActuatorBank {
  Heights4 heights{};
  Heights4 targets{};
  double max_speed = kDefaultMaxActuatorSpeed;  // m/s
  double stroke = 0.5;                          // m

  void set_targets(const Heights4& t) {
    for (int i = 0; i < 4; ++i) targets[i] = clamp(t[i], 0.0, stroke);
  }
};

inline ActuatorBank servo_step(const ActuatorBank& bank, double dt) {
  if (!(dt > 0.0)) throw SimError("servo_step: dt > 0 required");
  ActuatorBank next = bank;
  double step = bank.max_speed * dt;
  for (int i = 0; i < 4; ++i) {
    double target = clamp(bank.targets[i], 0.0, bank.stroke);
    next.targets[i] = target;
    double delta = target - bank.heights[i];
    if (delta > step) delta = step;
    if (delta < -step) delta = -step;
    next.heights[i] = clamp(bank.heights[i] + delta, 0.0, bank.stroke);
  }
  return next;
}

// One edge held at zero, the opposite edge raised 1 cm per step at one step
// per second. Actuators 0 and 3 share the x = 0 edge.
inline Heights4 edge_protocol(double t, double stroke = 0.5) {
  double h = std::min(0.01 * std::floor(t), stroke);
  return {0.0, h, h, 0.0};
}

// Corner 0 held at zero, the opposite diagonal corner raised 1 cm/s and its
// two neighbors 0.5 cm/s.
inline Heights4 diagonal_protocol(double t, double stroke = 0.5) {
  double fast = std::min(0.01 * std::floor(t), stroke);
  double slow = std::min(0.005 * std::floor(t), stroke);
  return {0.0, slow, fast, slow};
}

// Sinusoidal wave with per-actuator phase lag; the offset keeps heights in
// [0, 2A] which stays within the stroke for A <= stroke/2.
inline Heights4 circular_protocol(double t, double amplitude, double frequency,
                                  double phase_step = kPi / 4.0,
                                  double stroke = 0.5) {
  if (!(amplitude > 0.0) || amplitude > stroke / 2.0)
    throw SimError("circular_protocol: amplitude must be in (0, stroke/2]");
  if (!(frequency > 0.0))
    throw SimError("circular_protocol: frequency > 0 required");
  Heights4 h;
  for (int i = 0; i < 4; ++i)
    h[i] = amplitude *
           (1.0 + std::sin(2.0 * kPi * frequency * t - i * phase_step));
  return h;
}

// Scripted baseline: raise the corners behind the object (relative to the
// target direction) to build a slope toward the target.
inline Heights4 greedy_tilt_controller(const Vec2& object_xy,
                                       const Vec2& target_xy,
                                       const FrameConfig& frame, double gain,
                                       double base) {
  Vec2 u = (target_xy - object_xy).normalized_or_zero();
  Heights4 h;
  auto corners = frame.corner_xy();
  for (int i = 0; i < 4; ++i) {
    Vec2 toward_corner = (corners[i] - object_xy).normalized_or_zero();
    double alignment = std::max(0.0, -u.dot(toward_corner));
    h[i] = clamp(base + gain * alignment, 0.0, frame.stroke);
  }
  return h;
}

}  // namespace softsurf

#endif  // SOFTSURF_ACTUATION_HPP_
