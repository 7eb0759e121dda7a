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

#ifndef SOFTSURF_EXPERIMENT_HPP_
#define SOFTSURF_EXPERIMENT_HPP_

#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "softsurf/actuation.hpp"
#include "softsurf/env.hpp"
#include "softsurf/io.hpp"
#include "softsurf/world.hpp"

namespace softsurf {

struct RegimeSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  Regime regime = Regime::Stationary;
};

struct RunSummary {
  double max_displacement = 0.0;  // from the first sample's xy
  std::optional<double> fall_time;
  std::optional<double> fall_elevation;  // max commanded height at the fall
  std::vector<RegimeSegment> segments;
  Quantiles center_distance;  // distance from the frame center, per sample
};

struct ExperimentResult {
  RunMeta meta;
  std::vector<TrajectorySample> samples;
  RunSummary summary;
};

// Summaries are computed on 9-significant-digit rounded samples, exactly as
// they are serialized, so a replay from disk reproduces them bit for bit.
inline RunSummary summarize(const std::vector<TrajectorySample>& raw,
                            const FrameConfig& frame) {
  RunSummary s;
  if (raw.empty()) return s;
  std::vector<TrajectorySample> samples;
  samples.reserve(raw.size());
  for (const auto& r : raw) samples.push_back(round9(r));

  const Vec2 origin = samples.front().object_position.xy();
  const Vec2 center{round9(frame.frame_side / 2.0),
                    round9(frame.frame_side / 2.0)};
  std::vector<double> center_d;
  center_d.reserve(samples.size());
  for (const auto& smp : samples) {
    Vec2 xy = smp.object_position.xy();
    s.max_displacement =
        std::max(s.max_displacement, round9((xy - origin).norm()));
    center_d.push_back(round9((xy - center).norm()));
    if (!s.fall_time && smp.regime == Regime::Fallen) {
      s.fall_time = smp.t;
      double h = 0.0;
      for (double v : smp.actuator_heights) h = std::max(h, v);
      s.fall_elevation = h;
    }
  }
  s.center_distance = compute_quantiles(center_d);
  s.center_distance.min = round9(s.center_distance.min);
  s.center_distance.q1 = round9(s.center_distance.q1);
  s.center_distance.median = round9(s.center_distance.median);
  s.center_distance.q3 = round9(s.center_distance.q3);
  s.center_distance.max = round9(s.center_distance.max);

  RegimeSegment seg{samples.front().t, samples.front().t,
                    samples.front().regime};
  for (const auto& smp : samples) {
    if (smp.regime == seg.regime) {
      seg.t_end = smp.t;
    } else {
      s.segments.push_back(seg);
      seg = {smp.t, smp.t, smp.regime};
    }
  }
  s.segments.push_back(seg);
  return s;
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["max_displacement"] = s.max_displacement;
  if (s.fall_time) {
    j["fall_time"] = *s.fall_time;
    j["fall_elevation"] = *s.fall_elevation;
  }
  j["center_distance"] = {{"min", s.center_distance.min},
                          {"q1", s.center_distance.q1},
                          {"median", s.center_distance.median},
                          {"q3", s.center_distance.q3},
                          {"max", s.center_distance.max}};
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& g : s.segments)
    segs.push_back({{"t_start", g.t_start},
                    {"t_end", g.t_end},
                    {"regime", regime_name(g.regime)}});
  j["regime_segments"] = segs;
  return j;
}

inline nlohmann::json meta_to_json(const RunMeta& meta) {
  nlohmann::json j;
  j["config_hash"] = hash_hex(meta.config_hash);
  j["seed"] = meta.seed;
  if (!meta.object.empty()) j["object"] = meta.object;
  if (!meta.protocol.empty()) j["protocol"] = meta.protocol;
  for (const auto& [k, v] : meta.params) j["params"][k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// Scripted-protocol experiments (the edge and diagonal elevation ramps).

inline double protocol_saturation_time(const std::string& protocol,
                                       double stroke) {
  if (protocol == "edge") return stroke / 0.01;
  if (protocol == "diagonal") return stroke / 0.005;
  throw SimError("unknown protocol \"" + protocol + "\" (edge|diagonal)");
}

inline Heights4 protocol_heights(const std::string& protocol, double t,
                                 double stroke) {
  if (protocol == "edge") return edge_protocol(t, stroke);
  if (protocol == "diagonal") return diagonal_protocol(t, stroke);
  throw SimError("unknown protocol \"" + protocol + "\" (edge|diagonal)");
}

// Runs the protocol from a centered rest state with actuators at zero until
// the object falls or the protocol has been saturated for 10 s.
inline std::vector<ExperimentResult> run_dynamics_experiment(
    const Config& cfg, const std::string& protocol,
    const std::string& object_name, int runs, uint64_t seed) {
  const ObjectSpec& object = find_object(cfg.objects, object_name);
  const double stroke = cfg.frame.stroke;
  const double t_stop = protocol_saturation_time(protocol, stroke) + 10.0;
  const Vec2 center{cfg.frame.frame_side / 2.0, cfg.frame.frame_side / 2.0};

  std::vector<ExperimentResult> results;
  World world(cfg, object);
  ClothState settled = world.settled_cloth(0.0);
  for (int run = 0; run < runs; ++run) {
    ExperimentResult r;
    r.meta.config_hash = config_hash(cfg);
    r.meta.seed = seed;
    r.meta.object = object_name;
    r.meta.protocol = protocol;
    r.meta.params["run"] = std::to_string(run);
    r.meta.params["frame_side"] = format_g9(cfg.frame.frame_side);

    world.reset(center, 0.0, &settled);
    r.samples.push_back(world.sample());
    try {
      while (!world.fallen() && world.time() < t_stop) {
        world.step(protocol_heights(protocol, world.time(), stroke));
        r.samples.push_back(world.sample());
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (run " +
                            std::to_string(run) + ")");
    }
    r.summary = summarize(r.samples, cfg.frame);
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Amplitude sweep with the circular protocol. One run per amplitude, 5 cm
// steps, until the object falls or the amplitude reaches stroke/2.

struct SweepOptions {
  double amplitude_start = 0.05;
  double amplitude_step = 0.05;
  double duration = 60.0;
  double frequency = 0.2;  // Hz; the paper does not state a rate
  double phase_step = kPi / 4.0;
};

inline std::vector<ExperimentResult> run_amplitude_sweep(
    const Config& cfg, const std::string& object_name,
    const SweepOptions& opt, uint64_t seed) {
  const ObjectSpec& object = find_object(cfg.objects, object_name);
  const double stroke = cfg.frame.stroke;
  const Vec2 center{cfg.frame.frame_side / 2.0, cfg.frame.frame_side / 2.0};

  std::vector<ExperimentResult> results;
  World world(cfg, object);
  ClothState settled = world.settled_cloth(0.0);
  for (double amplitude = opt.amplitude_start;
       amplitude <= stroke / 2.0 + 1e-12; amplitude += opt.amplitude_step) {
    ExperimentResult r;
    r.meta.config_hash = config_hash(cfg);
    r.meta.seed = seed;
    r.meta.object = object_name;
    r.meta.protocol = "circular";
    r.meta.params["amplitude"] = format_g9(amplitude);
    r.meta.params["frequency"] = format_g9(opt.frequency);
    r.meta.params["phase_step"] = format_g9(opt.phase_step);
    r.meta.params["frame_side"] = format_g9(cfg.frame.frame_side);

    world.reset(center, 0.0, &settled);
    r.samples.push_back(world.sample());
    try {
      while (!world.fallen() && world.time() < opt.duration) {
        world.step(circular_protocol(world.time(), amplitude, opt.frequency,
                                     opt.phase_step, stroke));
        r.samples.push_back(world.sample());
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (amplitude " +
                            format_g9(amplitude) + ")");
    }
    bool fell = world.fallen();
    r.summary = summarize(r.samples, cfg.frame);
    results.push_back(std::move(r));
    if (fell) break;
  }
  return results;
}

inline nlohmann::json sweep_to_json(const Config& cfg,
                                    const std::vector<ExperimentResult>& runs) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "amplitude_sweep";
  if (!runs.empty()) j["metadata"] = meta_to_json(runs.front().meta);
  nlohmann::json arr = nlohmann::json::array();
  std::optional<double> fall_amplitude;
  for (const auto& r : runs) {
    nlohmann::json one;
    one["amplitude"] = std::strtod(r.meta.params.at("amplitude").c_str(),
                                   nullptr);
    one["summary"] = summary_to_json(r.summary);
    if (r.summary.fall_time) fall_amplitude = one["amplitude"].get<double>();
    arr.push_back(one);
  }
  j["runs"] = arr;
  if (fall_amplitude)
    j["fall_amplitude"] = *fall_amplitude;
  else
    j["no_fall_observed"] = true;
  (void)cfg;
  return j;
}

// ---------------------------------------------------------------------------
// Success-grid evaluation

// A controller maps the 10-number observation to 4 actions in [-1, 1].
using Controller =
    std::function<std::array<double, kActSize>(const std::vector<double>&)>;

inline Controller greedy_controller(const Config& cfg, double gain = 0.6,
                                    double base = 0.25) {
  return [cfg, gain, base](const std::vector<double>& obs) {
    const double side = cfg.frame.frame_side;
    Vec2 oxy{(obs[0] + 1.0) / 2.0 * side, (obs[1] + 1.0) / 2.0 * side};
    Vec2 txy{(obs[4] + 1.0) / 2.0 * side, (obs[5] + 1.0) / 2.0 * side};
    Heights4 h = greedy_tilt_controller(oxy, txy, cfg.frame, gain, base);
    std::array<double, kActSize> act;
    for (int i = 0; i < kActSize; ++i)
      act[i] = 2.0 * h[i] / cfg.frame.stroke - 1.0;
    return act;
  };
}

inline Controller policy_controller(const PolicyParams& params) {
  return [params](const std::vector<double>& obs) {
    Rng unused(0, 0);
    PolicySample s = policy_act(params, obs, true, unused);
    std::array<double, kActSize> act;
    for (int i = 0; i < kActSize; ++i) act[i] = s.action[i];
    return act;
  };
}

struct CellEpisode {
  int cell = 0;
  int repeat = 0;
  Vec2 start;
  Vec2 target;
  int steps = 0;
  bool success = false;
  bool fell = false;
};

struct SuccessGrid {
  int grid_n_sub = 10;
  int repeats = 10;
  std::vector<double> mean_success;       // grid_n_sub^2 values in [0, 1]
  std::vector<CellEpisode> episodes;      // cell-major, repeat-minor
};

// One evaluation episode; overridable in tests (the production runner plays
// the controller in a fresh environment).
using EpisodeRunner = std::function<CellEpisode(int cell, int repeat,
                                                const Vec2& target, Rng& rng)>;

inline EpisodeRunner make_episode_runner(const Config& cfg,
                                         const Controller& controller,
                                         EnvMode mode = EnvMode::Cloth) {
  auto env = std::make_shared<TargetReachEnv>(cfg, RewardWeights{}, mode);
  return [env, controller](int cell, int repeat, const Vec2& target,
                           Rng& rng) {
    CellEpisode ep;
    ep.cell = cell;
    ep.repeat = repeat;
    ep.target = target;
    std::vector<double> obs = env->reset(rng, target);
    ep.start = env->start_position();
    while (true) {
      EnvStep s = env->step(controller(obs));
      obs = s.observation;
      ++ep.steps;
      if (s.done) {
        ep.success = s.info.success;
        ep.fell = s.info.fell;
        break;
      }
    }
    return ep;
  };
}

// Evaluates each sub-region with `repeats` episodes: target uniform in the
// cell, start uniform in the frame interior. Cells may run concurrently;
// the output ordering and the per-episode rng streams are fixed by (cell,
// repeat), so results do not depend on the thread count.
inline SuccessGrid eval_success_grid(const EpisodeRunner& run_episode,
                                     double frame_side, uint64_t seed,
                                     int repeats = 10, int grid_n_sub = 10,
                                     const std::vector<int>& cells = {},
                                     int threads = 0) {
  SuccessGrid grid;
  grid.grid_n_sub = grid_n_sub;
  grid.repeats = repeats;
  grid.mean_success.assign(static_cast<size_t>(grid_n_sub) * grid_n_sub, 0.0);

  std::vector<int> todo = cells;
  if (todo.empty()) {
    todo.resize(static_cast<size_t>(grid_n_sub) * grid_n_sub);
    std::iota(todo.begin(), todo.end(), 0);
  }
  grid.episodes.resize(todo.size() * repeats);

  const double cell_side = frame_side / grid_n_sub;
  auto run_cell = [&](size_t ti) {
    int cell = todo[ti];
    int cx = cell % grid_n_sub;
    int cy = cell / grid_n_sub;
    for (int rep = 0; rep < repeats; ++rep) {
      Rng rng = seeded_rng(seed, 10000 + static_cast<uint64_t>(cell) * 100 +
                                     static_cast<uint64_t>(rep));
      Vec2 target{(cx + rng.uniform()) * cell_side,
                  (cy + rng.uniform()) * cell_side};
      grid.episodes[ti * repeats + rep] = run_episode(cell, rep, target, rng);
    }
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int n_threads = threads > 0 ? threads : (hw > 0 ? hw : 1);
  n_threads = static_cast<int>(
      std::min(static_cast<size_t>(n_threads), todo.size()));
  if (n_threads <= 1) {
    for (size_t i = 0; i < todo.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&, w]() {
        for (size_t i = w; i < todo.size(); i += n_threads) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  for (size_t ti = 0; ti < todo.size(); ++ti) {
    int successes = 0;
    for (int rep = 0; rep < repeats; ++rep)
      if (grid.episodes[ti * repeats + rep].success) ++successes;
    grid.mean_success[todo[ti]] =
        static_cast<double>(successes) / static_cast<double>(repeats);
  }
  return grid;
}

inline nlohmann::json grid_to_json(const SuccessGrid& grid, uint64_t cfg_hash,
                                   uint64_t seed,
                                   const std::string& controller_name) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "success_grid";
  j["config_hash"] = hash_hex(cfg_hash);
  j["seed"] = seed;
  j["controller"] = controller_name;
  j["grid_n_sub"] = grid.grid_n_sub;
  j["repeats"] = grid.repeats;
  j["mean_success"] = grid.mean_success;
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : grid.episodes)
    eps.push_back({{"cell", e.cell},
                   {"repeat", e.repeat},
                   {"start", {round9(e.start.x), round9(e.start.y)}},
                   {"target", {round9(e.target.x), round9(e.target.y)}},
                   {"steps", e.steps},
                   {"success", e.success},
                   {"fell", e.fell}});
  j["episodes"] = eps;
  return j;
}

}  // namespace softsurf

#endif  // SOFTSURF_EXPERIMENT_HPP_
