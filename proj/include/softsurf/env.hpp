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

#ifndef SOFTSURF_ENV_HPP_
#define SOFTSURF_ENV_HPP_

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "softsurf/config.hpp"
#include "softsurf/rng.hpp"
#include "softsurf/world.hpp"

namespace softsurf {

inline constexpr int kObsSize = 10;
inline constexpr int kActSize = 4;

// Reward = -w_dist * d + w_vel * (v . u_toward_target)
//          + w_success * [d < success_radius] - w_fall * [fell].
struct RewardWeights {
  double w_dist = 1.0;       // 1/m
  double w_vel = 2.0;        // s/m
  double w_fall = 50.0;
  double w_success = 50.0;
  double success_radius = 0.05;  // m
};

struct StepInfo {
  double distance = 0.0;
  Regime regime = Regime::Stationary;
  bool fell = false;
  bool success = false;
};

// The four sub-rewards, summed. Zeroing one weight removes exactly that
// term's contribution.
inline double reward_terms(const RewardWeights& w, double distance,
                           double velocity_toward_target, bool success,
                           bool fell) {
  return -w.w_dist * distance + w.w_vel * velocity_toward_target +
         (success ? w.w_success : 0.0) - (fell ? w.w_fall : 0.0);
}

struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;       // summed over the control steps consumed
  int steps_consumed = 0;    // control steps this decision covered
  bool done = false;
  StepInfo info;
};

// The cloth world is the real environment; the tilt-plane mode replaces it
// with a ball on a rigid plane through the four actuator tips, which
// isolates the learning machinery from cloth dynamics for smoke tests.
enum class EnvMode { Cloth, TiltPlane };

class TargetReachEnv {
 public:
  // action_repeat holds each decision for that many control steps: the
  // actuators still track at the control rate, but exploration noise
  // persists long enough for the fabric to respond to it.
  explicit TargetReachEnv(Config config = learn_config(),
                          RewardWeights weights = {},
                          EnvMode mode = EnvMode::Cloth,
                          int step_limit = 600, int action_repeat = 1)
      : cfg_(std::move(config)),
        weights_(weights),
        mode_(mode),
        step_limit_(step_limit),
        action_repeat_(action_repeat < 1 ? 1 : action_repeat),
        object_(find_object(cfg_.objects, "sphere")) {
    if (mode_ == EnvMode::Cloth) {
      world_ = std::make_unique<World>(cfg_, object_);
      template_cloth_ = world_->settled_cloth(initial_height());
    }
    bank_.stroke = cfg_.frame.stroke;
  }

  TargetReachEnv(const TargetReachEnv& o)
      : cfg_(o.cfg_),
        weights_(o.weights_),
        mode_(o.mode_),
        step_limit_(o.step_limit_),
        action_repeat_(o.action_repeat_),
        object_(o.object_),
        template_cloth_(o.template_cloth_),
        bank_(o.bank_) {
    if (o.world_) world_ = std::make_unique<World>(cfg_, object_);
  }

  double initial_height() const { return cfg_.frame.stroke / 2.0; }
  const Config& config() const { return cfg_; }
  const RewardWeights& weights() const { return weights_; }
  int step_limit() const { return step_limit_; }
  EnvMode mode() const { return mode_; }

  // Start and target positions are sampled uniformly inside the frame with
  // a 10 cm margin unless an explicit target is supplied.
  Vec2 sample_interior(Rng& rng) const {
    const double side = cfg_.frame.frame_side;
    const double margin = 0.1;
    return {rng.uniform(margin, side - margin),
            rng.uniform(margin, side - margin)};
  }

  std::vector<double> reset(Rng& rng,
                            std::optional<Vec2> target = std::nullopt) {
    const double side = cfg_.frame.frame_side;
    if (target) {
      if (target->x < 0.0 || target->x > side || target->y < 0.0 ||
          target->y > side)
        throw SimError("env reset: target outside frame");
      target_ = *target;
    } else {
      target_ = sample_interior(rng);
    }
    start_ = sample_interior(rng);
    steps_ = 0;
    done_ = false;

    if (mode_ == EnvMode::Cloth) {
      world_->reset(start_, initial_height(), &template_cloth_);
    } else {
      ball_xy_ = start_;
      ball_v_ = {};
      bank_.heights.fill(initial_height());
      bank_.targets.fill(initial_height());
      fallen_ = false;
    }
    return observation();
  }

  Vec2 start_position() const { return start_; }
  Vec2 target_position() const { return target_; }
  long long episode_steps() const { return steps_; }
  const World& world() const { return *world_; }

  EnvStep step(const std::array<double, kActSize>& action) {
    if (done_) throw SimError("env step: episode already done");
    Heights4 targets;
    for (int i = 0; i < kActSize; ++i) {
      double a = clamp(action[i], -1.0, 1.0);
      targets[i] = (a + 1.0) * 0.5 * cfg_.frame.stroke;
    }

    EnvStep out;
    for (int rep = 0; rep < action_repeat_ && !done_; ++rep) {
      if (mode_ == EnvMode::Cloth)
        world_->step(targets);
      else
        tilt_step(targets);
      ++steps_;
      ++out.steps_consumed;

      Vec2 xy = object_xy();
      Vec2 v = object_vxy();
      double d = (xy - target_).norm();
      bool fell = mode_ == EnvMode::Cloth ? world_->fallen() : fallen_;
      bool success = !fell && d < weights_.success_radius;

      Vec2 toward = (target_ - xy).normalized_or_zero();
      out.reward += reward_terms(weights_, d, v.dot(toward), success, fell);
      done_ = success || fell || steps_ >= step_limit_;
      out.info.distance = d;
      out.info.fell = fell;
      out.info.success = success;
      out.info.regime =
          mode_ == EnvMode::Cloth ? world_->regime() : Regime::Sliding;
    }
    out.done = done_;
    out.observation = observation();
    return out;
  }

  std::vector<double> observation() const {
    const double side = cfg_.frame.frame_side;
    const double stroke = cfg_.frame.stroke;
    Vec2 xy = object_xy();
    Vec2 v = object_vxy();
    const Heights4& h =
        mode_ == EnvMode::Cloth ? world_->bank().heights : bank_.heights;
    std::vector<double> obs(kObsSize);
    obs[0] = 2.0 * xy.x / side - 1.0;
    obs[1] = 2.0 * xy.y / side - 1.0;
    obs[2] = v.x;  // m/s, scale 1
    obs[3] = v.y;
    obs[4] = 2.0 * target_.x / side - 1.0;
    obs[5] = 2.0 * target_.y / side - 1.0;
    for (int i = 0; i < 4; ++i) obs[6 + i] = h[i] / stroke;
    for (auto& o : obs) o = clamp(o, -1.5, 1.5);
    return obs;
  }

 private:
  Vec2 object_xy() const {
    return mode_ == EnvMode::Cloth ? world_->body().position.xy() : ball_xy_;
  }
  Vec2 object_vxy() const {
    return mode_ == EnvMode::Cloth ? world_->body().linear_velocity.xy()
                                   : ball_v_;
  }

  // Ball on the plane through the four actuator tips; viscous drag stands
  // in for all contact physics.
  void tilt_step(const Heights4& targets) {
    const double dt = cfg_.sim.control_dt();
    const double side = cfg_.frame.frame_side;
    bank_.set_targets(targets);
    bank_ = servo_step(bank_, dt);
    const Heights4& h = bank_.heights;
    double slope_x = ((h[1] + h[2]) - (h[0] + h[3])) / (2.0 * side);
    double slope_y = ((h[2] + h[3]) - (h[0] + h[1])) / (2.0 * side);
    const double drag = 0.8;
    ball_v_.x += (-cfg_.sim.gravity * slope_x - drag * ball_v_.x) * dt;
    ball_v_.y += (-cfg_.sim.gravity * slope_y - drag * ball_v_.y) * dt;
    ball_xy_ = ball_xy_ + ball_v_ * dt;
    const double margin = 0.1;
    if (ball_xy_.x < -margin || ball_xy_.x > side + margin ||
        ball_xy_.y < -margin || ball_xy_.y > side + margin)
      fallen_ = true;
  }

  Config cfg_;
  RewardWeights weights_;
  EnvMode mode_;
  int step_limit_;
  int action_repeat_ = 1;
  ObjectSpec object_;
  std::unique_ptr<World> world_;
  ClothState template_cloth_;
  // Tilt-plane state.
  ActuatorBank bank_;
  Vec2 ball_xy_;
  Vec2 ball_v_;
  bool fallen_ = false;

  Vec2 start_;
  Vec2 target_;
  long long steps_ = 0;
  bool done_ = true;
};

}  // namespace softsurf

#endif  // SOFTSURF_ENV_HPP_
