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

#ifndef SOFTSURF_PPO_HPP_
#define SOFTSURF_PPO_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "softsurf/env.hpp"
#include "softsurf/policy.hpp"

namespace softsurf {

// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t)
// A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// values carries one extra entry: the bootstrap for the final transition.
struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

inline GaeResult gae_compute(const std::vector<double>& rewards,
                             const std::vector<double>& values,
                             const std::vector<uint8_t>& dones, double gamma,
                             double lambda) {
  const size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n)
    throw SimError("gae_compute: length mismatch");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (size_t i = n; i-- > 0;) {
    double nonterminal = dones[i] ? 0.0 : 1.0;
    double delta =
        rewards[i] + gamma * values[i + 1] * nonterminal - values[i];
    running = delta + gamma * lambda * nonterminal * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

// One flattened on-policy batch.
struct RolloutBatch {
  int obs_size = 0;
  int act_size = 0;
  std::vector<double> obs;         // [n][obs_size]
  std::vector<double> pre_squash;  // [n][act_size]
  std::vector<double> log_probs;   // [n]
  std::vector<double> advantages;  // [n], normalized before updates
  std::vector<double> returns;     // [n]

  size_t size() const { return log_probs.size(); }
};

struct PpoLossStats {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;  // mean (ratio - 1) - log ratio
};

// Mean loss over the given indices and its parameter gradients:
//   L = -mean min(rho A, clip(rho) A) + c_v 0.5 mean (V - R)^2 - c_e H.
inline PpoLossStats ppo_loss_and_grads(
    const PolicyParams& params, const RolloutBatch& batch,
    const std::vector<int>& indices, double clip_eps, double value_coef,
    double entropy_coef, MlpGrads& pi_grads, std::vector<double>& log_std_grads,
    MlpGrads& value_grads) {
  PpoLossStats stats;
  const int obs_n = batch.obs_size;
  const int act_n = batch.act_size;
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  MlpCache pi_cache, v_cache;
  std::vector<double> obs(obs_n), mean, dmean(act_n);
  int clipped = 0;

  for (int idx : indices) {
    std::copy_n(batch.obs.data() + static_cast<size_t>(idx) * obs_n, obs_n,
                obs.begin());
    mean = mlp_forward(params.pi, obs, &pi_cache);
    double value = mlp_forward(params.value, obs, &v_cache)[0];

    const double* u = batch.pre_squash.data() + static_cast<size_t>(idx) * act_n;
    double lp = 0.0;
    for (int j = 0; j < act_n; ++j) {
      double sigma = std::exp(params.log_std[j]);
      double z = (u[j] - mean[j]) / sigma;
      lp += -0.5 * z * z - params.log_std[j] - kHalfLog2Pi;
      double a = std::tanh(u[j]);
      lp -= std::log(1.0 - a * a + 1e-8);
    }

    double advantage = batch.advantages[idx];
    double log_ratio = lp - batch.log_probs[idx];
    double ratio = std::exp(log_ratio);
    stats.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    double surr1 = ratio * advantage;
    double surr2 = clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
    bool unclipped = surr1 <= surr2 + 1e-18;
    stats.policy += -std::min(surr1, surr2) * inv_n;
    if (std::fabs(ratio - 1.0) > clip_eps) ++clipped;

    // d(-min)/d lp: gradient flows only through the unclipped branch.
    double dlp = unclipped ? -advantage * ratio * inv_n : 0.0;
    for (int j = 0; j < act_n; ++j) {
      double sigma = std::exp(params.log_std[j]);
      double z = (u[j] - mean[j]) / sigma;
      dmean[j] = dlp * (z / sigma);
      log_std_grads[j] += dlp * (z * z - 1.0);
    }
    mlp_backward(params.pi, pi_cache, dmean, pi_grads);

    double verr = value - batch.returns[idx];
    stats.value += 0.5 * verr * verr * inv_n;
    std::vector<double> dv{value_coef * verr * inv_n};
    mlp_backward(params.value, v_cache, dv, value_grads);
  }

  stats.entropy = policy_entropy(params);
  for (int j = 0; j < act_n; ++j) log_std_grads[j] -= entropy_coef;
  stats.clip_fraction = clipped * inv_n;
  stats.total = stats.policy + value_coef * stats.value -
                entropy_coef * stats.entropy;
  if (!std::isfinite(stats.total))
    throw SimError("ppo update: non-finite loss (policy=" +
                   std::to_string(stats.policy) +
                   ", value=" + std::to_string(stats.value) + ")");
  return stats;
}

// Normalizes advantages in place over the whole batch (epsilon-guarded).
inline void normalize_advantages(RolloutBatch& batch) {
  double mean = 0.0;
  for (double a : batch.advantages) mean += a;
  mean /= static_cast<double>(batch.advantages.size());
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(batch.advantages.size());
  double inv = 1.0 / std::sqrt(var + 1e-8);
  for (double& a : batch.advantages) a = (a - mean) * inv;
}

struct PpoOptimizer {
  Adam pi;
  AdamVec log_std;
  Adam value;

  explicit PpoOptimizer(double lr) {
    pi.lr = lr;
    log_std.lr = lr;
    value.lr = lr;
  }
};

// Gradient steps over shuffled minibatches for the given number of epochs.
// Optimization stops early once the approximate KL to the rollout policy
// exceeds target_kl (<= 0 disables the guard).
inline PpoLossStats ppo_update(PolicyParams& params, RolloutBatch& batch,
                               double clip_eps, int epochs, int minibatch_size,
                               PpoOptimizer& opt, double value_coef,
                               double entropy_coef, Rng& rng,
                               double target_kl = 0.0) {
  normalize_advantages(batch);
  std::vector<int> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  PpoLossStats last;
  bool stop = false;
  for (int epoch = 0; epoch < epochs && !stop; ++epoch) {
    // Fisher-Yates with the deterministic stream.
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(rng.uniform() * i);
      std::swap(order[i - 1], order[j]);
    }
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(minibatch_size)) {
      size_t end = std::min(order.size(),
                            start + static_cast<size_t>(minibatch_size));
      std::vector<int> mb(order.begin() + start, order.begin() + end);
      MlpGrads pi_g = MlpGrads::zeros_like(params.pi);
      MlpGrads v_g = MlpGrads::zeros_like(params.value);
      std::vector<double> ls_g(params.log_std.size(), 0.0);
      last = ppo_loss_and_grads(params, batch, mb, clip_eps, value_coef,
                                entropy_coef, pi_g, ls_g, v_g);
      if (target_kl > 0.0 && last.approx_kl > target_kl) {
        stop = true;
        break;
      }
      opt.pi.step(params.pi, pi_g);
      opt.log_std.step(params.log_std, ls_g);
      opt.value.step(params.value, v_g);
      params.clamp_log_std();
    }
  }
  if (!params.finite()) throw SimError("ppo update: non-finite parameters");
  return last;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  long long total_steps = 300000;
  int n_envs = 8;
  int rollout_len = 256;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  double lr = 1e-3;
  int epochs = 10;
  int minibatch = 256;
  double value_coef = 0.5;
  double entropy_coef = 0.003;
  double target_kl = 0.03;
  uint64_t seed = 0;
  std::vector<int> hidden = {64, 64};
  int threads = 0;  // 0: one per hardware core, capped by n_envs
};

struct TrainLogRow {
  int iteration = 0;
  long long env_steps = 0;
  int episodes = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  double fall_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<TrainLogRow> log;
};

using EnvFactory = std::function<TargetReachEnv(int)>;
using IterationHook =
    std::function<void(const TrainLogRow&, const PolicyParams&)>;

// Collects rollouts from n_envs independent worlds (each with its own rng
// stream) and alternates with clipped-surrogate updates. Results do not
// depend on the thread count: every env's trajectory is a function of its
// own stream and the parameter snapshot, and updates are serialized.
inline TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg,
                         const IterationHook& hook = {}) {
  Rng init_rng = seeded_rng(cfg.seed, 1);
  PolicyParams params =
      PolicyParams::make(kObsSize, kActSize, cfg.hidden, init_rng);
  TrainResult result{params, {}};
  if (cfg.total_steps <= 0) {
    result.params = params;
    return result;
  }

  const int n = cfg.n_envs;
  const int t_len = cfg.rollout_len;
  std::vector<TargetReachEnv> envs;
  std::vector<Rng> env_rngs;
  envs.reserve(n);
  for (int e = 0; e < n; ++e) {
    envs.push_back(make_env(e));
    env_rngs.push_back(seeded_rng(cfg.seed, 100 + static_cast<uint64_t>(e)));
  }
  std::vector<std::vector<double>> current_obs(n);
  for (int e = 0; e < n; ++e) current_obs[e] = envs[e].reset(env_rngs[e]);

  PpoOptimizer opt(cfg.lr);
  Rng update_rng = seeded_rng(cfg.seed, 2);

  // Per-env slices of the iteration buffers.
  std::vector<double> obs_buf, u_buf, lp_buf, val_buf, rew_buf;
  std::vector<uint8_t> done_buf;
  std::vector<double> bootstrap(n, 0.0);
  obs_buf.assign(static_cast<size_t>(n) * t_len * kObsSize, 0.0);
  u_buf.assign(static_cast<size_t>(n) * t_len * kActSize, 0.0);
  lp_buf.assign(static_cast<size_t>(n) * t_len, 0.0);
  val_buf.assign(static_cast<size_t>(n) * t_len, 0.0);
  rew_buf.assign(static_cast<size_t>(n) * t_len, 0.0);
  done_buf.assign(static_cast<size_t>(n) * t_len, 0);

  // Episode accounting (per env, then reduced per iteration).
  std::vector<double> episode_return(n, 0.0);
  struct IterStats {
    int episodes = 0, successes = 0, falls = 0, diverged = 0;
    double return_sum = 0.0;
  };

  long long steps_done = 0;
  int iteration = 0;
  std::vector<long long> consumed(n, 0);
  while (steps_done < cfg.total_steps) {
    ++iteration;
    std::vector<IterStats> stats(n);
    std::fill(consumed.begin(), consumed.end(), 0);

    auto collect_env = [&](int e) {
      TargetReachEnv& env = envs[e];
      Rng& rng = env_rngs[e];
      for (int t = 0; t < t_len; ++t) {
        size_t row = static_cast<size_t>(e) * t_len + t;
        std::copy(current_obs[e].begin(), current_obs[e].end(),
                  obs_buf.begin() + row * kObsSize);
        PolicySample sample = policy_act(params, current_obs[e], false, rng);
        std::copy(sample.pre_squash.begin(), sample.pre_squash.end(),
                  u_buf.begin() + row * kActSize);
        lp_buf[row] = sample.log_prob;
        val_buf[row] = policy_value(params, current_obs[e]);

        std::array<double, kActSize> act;
        for (int j = 0; j < kActSize; ++j) act[j] = sample.action[j];
        bool diverged = false;
        EnvStep step;
        try {
          step = env.step(act);
        } catch (const DivergenceError&) {
          diverged = true;
        }
        if (diverged) {
          rew_buf[row] = -env.weights().w_fall;
          done_buf[row] = 1;
          ++stats[e].diverged;
          ++stats[e].episodes;
          ++consumed[e];
          current_obs[e] = env.reset(rng);
          episode_return[e] = 0.0;
          continue;
        }
        consumed[e] += step.steps_consumed;
        rew_buf[row] = step.reward;
        done_buf[row] = step.done ? 1 : 0;
        episode_return[e] += step.reward;
        if (step.done) {
          ++stats[e].episodes;
          stats[e].return_sum += episode_return[e];
          if (step.info.success) ++stats[e].successes;
          if (step.info.fell) ++stats[e].falls;
          episode_return[e] = 0.0;
          current_obs[e] = env.reset(rng);
        } else {
          current_obs[e] = step.observation;
        }
      }
      size_t last = static_cast<size_t>(e) * t_len + (t_len - 1);
      bootstrap[e] =
          done_buf[last] ? 0.0 : policy_value(params, current_obs[e]);
    };

    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int n_threads = cfg.threads > 0 ? cfg.threads : (hw > 0 ? hw : 1);
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
      for (int e = 0; e < n; ++e) collect_env(e);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < n_threads; ++w)
        pool.emplace_back([&, w]() {
          for (int e = w; e < n; e += n_threads) collect_env(e);
        });
      for (auto& th : pool) th.join();
    }
    for (long long c : consumed) steps_done += c;

    // Per-env GAE into one flat batch.
    RolloutBatch batch;
    batch.obs_size = kObsSize;
    batch.act_size = kActSize;
    batch.obs = obs_buf;
    batch.pre_squash = u_buf;
    batch.log_probs = lp_buf;
    batch.advantages.assign(static_cast<size_t>(n) * t_len, 0.0);
    batch.returns.assign(static_cast<size_t>(n) * t_len, 0.0);
    for (int e = 0; e < n; ++e) {
      std::vector<double> r(t_len), v(t_len + 1);
      std::vector<uint8_t> d(t_len);
      for (int t = 0; t < t_len; ++t) {
        size_t row = static_cast<size_t>(e) * t_len + t;
        r[t] = rew_buf[row];
        v[t] = val_buf[row];
        d[t] = done_buf[row];
      }
      v[t_len] = bootstrap[e];
      GaeResult gae = gae_compute(r, v, d, cfg.gamma, cfg.lambda);
      for (int t = 0; t < t_len; ++t) {
        size_t row = static_cast<size_t>(e) * t_len + t;
        batch.advantages[row] = gae.advantages[t];
        batch.returns[row] = gae.returns[t];
      }
    }

    IterStats total;
    for (const auto& s : stats) {
      total.episodes += s.episodes;
      total.successes += s.successes;
      total.falls += s.falls;
      total.diverged += s.diverged;
      total.return_sum += s.return_sum;
    }
    if (total.episodes > 0 && total.diverged * 2 > total.episodes)
      throw DivergenceError("training: over half of this iteration's " +
                            std::to_string(total.episodes) +
                            " episodes diverged");

    PpoLossStats loss =
        ppo_update(params, batch, cfg.clip_eps, cfg.epochs, cfg.minibatch,
                   opt, cfg.value_coef, cfg.entropy_coef, update_rng,
                   cfg.target_kl);

    TrainLogRow row;
    row.iteration = iteration;
    row.env_steps = steps_done;
    row.episodes = total.episodes;
    int completed = total.episodes - total.diverged;
    row.mean_return =
        completed > 0 ? total.return_sum / completed : 0.0;
    row.success_rate =
        total.episodes > 0
            ? static_cast<double>(total.successes) / total.episodes
            : 0.0;
    row.fall_rate = total.episodes > 0
                        ? static_cast<double>(total.falls) / total.episodes
                        : 0.0;
    row.policy_loss = loss.policy;
    row.value_loss = loss.value;
    row.entropy = loss.entropy;
    result.log.push_back(row);
    if (hook) hook(row, params);
  }
  result.params = params;
  return result;
}

}  // namespace softsurf

#endif  // SOFTSURF_PPO_HPP_
