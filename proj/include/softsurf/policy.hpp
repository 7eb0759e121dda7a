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

#ifndef SOFTSURF_POLICY_HPP_
#define SOFTSURF_POLICY_HPP_

#include <cmath>
#include <vector>

#include "softsurf/nn.hpp"
#include "softsurf/rng.hpp"

namespace softsurf {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kHalfLog2Pi = 0.91893853320467274;  // 0.5 ln(2 pi)

// Gaussian policy with tanh squashing and a separate value network. The
// log-std is state independent.
struct PolicyParams {
  Mlp pi;                       // obs -> action means
  std::vector<double> log_std;  // one per action dimension
  Mlp value;                    // obs -> scalar

  int obs_size() const { return pi.input_size(); }
  int act_size() const { return pi.output_size(); }

  static PolicyParams make(int obs, int act, const std::vector<int>& hidden,
                           Rng& rng) {
    PolicyParams p;
    std::vector<int> pi_sizes{obs};
    for (int h : hidden) pi_sizes.push_back(h);
    pi_sizes.push_back(act);
    std::vector<int> v_sizes{obs};
    for (int h : hidden) v_sizes.push_back(h);
    v_sizes.push_back(1);
    p.pi = Mlp::make(pi_sizes, rng);
    p.value = Mlp::make(v_sizes, rng);
    // Near-zero action head: the initial mean policy holds mid-stroke and
    // exploration comes from the sampling noise alone.
    for (auto& w : p.pi.layers.back().w) w *= 0.01;
    p.log_std.assign(act, 0.0);
    return p;
  }

  void clamp_log_std() {
    for (auto& v : log_std) v = clamp(v, kLogStdMin, kLogStdMax);
  }

  bool finite() const {
    bool ok = true;
    const_cast<PolicyParams*>(this)->pi.visit_params(
        [&](double& v) { ok = ok && std::isfinite(v); });
    const_cast<PolicyParams*>(this)->value.visit_params(
        [&](double& v) { ok = ok && std::isfinite(v); });
    for (double v : log_std) ok = ok && std::isfinite(v);
    return ok;
  }
};

struct PolicySample {
  std::vector<double> action;      // tanh-squashed, in [-1, 1]
  std::vector<double> pre_squash;  // u with a = tanh(u)
  double log_prob = 0.0;
};

// Log density of the squashed action given the pre-squash sample u:
//   log N(u; mu, sigma) - sum log(1 - tanh(u)^2 + eps).
inline double squashed_log_prob(const std::vector<double>& mean,
                                const std::vector<double>& log_std,
                                const std::vector<double>& pre_squash) {
  double lp = 0.0;
  for (size_t j = 0; j < mean.size(); ++j) {
    double sigma = std::exp(log_std[j]);
    double z = (pre_squash[j] - mean[j]) / sigma;
    lp += -0.5 * z * z - log_std[j] - kHalfLog2Pi;
    double a = std::tanh(pre_squash[j]);
    lp -= std::log(1.0 - a * a + 1e-8);
  }
  return lp;
}

inline PolicySample policy_act(const PolicyParams& params,
                               const std::vector<double>& obs,
                               bool deterministic, Rng& rng) {
  std::vector<double> mean = mlp_forward(params.pi, obs);
  PolicySample s;
  s.pre_squash.resize(mean.size());
  s.action.resize(mean.size());
  for (size_t j = 0; j < mean.size(); ++j) {
    double u = mean[j];
    if (!deterministic) u += std::exp(params.log_std[j]) * rng.normal();
    s.pre_squash[j] = u;
    s.action[j] = std::tanh(u);
  }
  s.log_prob = squashed_log_prob(mean, params.log_std, s.pre_squash);
  return s;
}

inline double policy_value(const PolicyParams& params,
                           const std::vector<double>& obs) {
  return mlp_forward(params.value, obs)[0];
}

// Entropy of the pre-squash Gaussian (used as the exploration bonus).
inline double policy_entropy(const PolicyParams& params) {
  double h = 0.0;
  for (double ls : params.log_std) h += ls + 0.5 + kHalfLog2Pi;
  return h;
}

}  // namespace softsurf

#endif  // SOFTSURF_POLICY_HPP_
