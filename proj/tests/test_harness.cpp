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
#include <set>
#include <vector>

#include "softsurf/experiment.hpp"
#include "softsurf/io.hpp"

using namespace softsurf;

namespace {

std::vector<TrajectorySample> synthetic_samples(int n) {
  std::vector<TrajectorySample> out;
  Rng rng = seeded_rng(77, 0);
  for (int i = 0; i < n; ++i) {
    TrajectorySample s;
    s.t = i / 60.0;
    s.object_position = {0.25 + 0.01 * std::sin(0.1 * i),
                         0.25 + 0.003 * i, 0.02 + rng.uniform(-0.001, 0.001)};
    s.object_orientation =
        Quat::from_axis_angle({0.3, 1.0, 0.2}, 0.05 * i).normalized();
    s.object_velocity = {rng.normal() * 0.01, 0.18, 0.0};
    s.actuator_heights = {0.1, 0.2, 0.1 + 0.001 * i, 0.0};
    s.regime = i < n / 2 ? Regime::Stationary : Regime::Pulling;
    out.push_back(s);
  }
  return out;
}

RunMeta test_meta() {
  RunMeta meta;
  meta.config_hash = config_hash(default_config());
  meta.seed = 42;
  meta.object = "sphere";
  meta.protocol = "edge";
  meta.params["run"] = "0";
  meta.params["frame_side"] = "0.5";
  return meta;
}

}  // namespace

TEST_CASE("quantiles: linear interpolation between closest ranks") {
  // Reference: sorted x, h = p (n-1), x[lo] + frac (x[lo+1] - x[lo]).
  std::vector<double> five{5.0, 1.0, 3.0, 2.0, 4.0};
  Quantiles q = compute_quantiles(five);
  CHECK(q.min == 1.0);
  CHECK(q.q1 == 2.0);
  CHECK(q.median == 3.0);
  CHECK(q.q3 == 4.0);
  CHECK(q.max == 5.0);

  std::vector<double> four{1.0, 2.0, 3.0, 10.0};
  Quantiles r = compute_quantiles(four);
  CHECK(r.q1 == doctest::Approx(1.75));
  CHECK(r.median == doctest::Approx(2.5));
  CHECK(r.q3 == doctest::Approx(4.75));

  // Independent re-derivation on random data.
  Rng rng = seeded_rng(5, 5);
  std::vector<double> data;
  for (int i = 0; i < 101; ++i) data.push_back(rng.uniform(-10.0, 10.0));
  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  auto ref = [&](double p) {
    double h = p * (sorted.size() - 1.0);
    size_t lo = static_cast<size_t>(h);
    double frac = h - lo;
    return lo + 1 < sorted.size()
               ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
               : sorted.back();
  };
  Quantiles s = compute_quantiles(data);
  CHECK(s.q1 == ref(0.25));
  CHECK(s.median == ref(0.5));
  CHECK(s.q3 == ref(0.75));
}

TEST_CASE("format_g9 / round9 behave like the serialized form") {
  CHECK(format_g9(0.1) == "0.1");
  CHECK(format_g9(1.0 / 3.0) == "0.333333333");
  CHECK(round9(1.0 / 3.0) == 0.333333333);
  // Round-trip through text is idempotent.
  double v = 0.123456789123;
  CHECK(round9(round9(v)) == round9(v));
  CHECK(format_g9(round9(v)) == format_g9(v));
}

TEST_CASE("trajectory table: round-trip and byte stability") {
  RunMeta meta = test_meta();
  auto samples = synthetic_samples(50);
  std::string text = trajectory_to_string(meta, samples);
  std::string text2 = trajectory_to_string(meta, samples);
  CHECK(text == text2);  // byte-identical for identical inputs

  TrajectoryFile parsed = parse_trajectory(text, "test");
  CHECK(parsed.meta.config_hash == meta.config_hash);
  CHECK(parsed.meta.seed == meta.seed);
  CHECK(parsed.meta.object == "sphere");
  CHECK(parsed.meta.protocol == "edge");
  CHECK(parsed.meta.params.at("run") == "0");
  REQUIRE(parsed.samples.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    TrajectorySample expect = round9(samples[i]);
    CHECK(parsed.samples[i].t == expect.t);
    CHECK(parsed.samples[i].object_position.x == expect.object_position.x);
    CHECK(parsed.samples[i].object_orientation.w ==
          expect.object_orientation.w);
    CHECK(parsed.samples[i].actuator_heights[2] ==
          expect.actuator_heights[2]);
    CHECK(parsed.samples[i].regime == expect.regime);
  }

  // Re-serializing the parsed table reproduces the file byte for byte.
  CHECK(trajectory_to_string(parsed.meta, parsed.samples) == text);
}

TEST_CASE("trajectory table: empty sample list gives a header-only table") {
  std::string text = trajectory_to_string(test_meta(), {});
  CHECK(text.find(kTrajectoryHeader) != std::string::npos);
  TrajectoryFile parsed = parse_trajectory(text, "test");
  CHECK(parsed.samples.empty());
}

TEST_CASE("trajectory parser rejects malformed input") {
  CHECK_THROWS_AS(parse_trajectory("no header here", "ctx"), IoError);
  std::string bad = std::string(kTrajectoryHeader) + "\n1,2,3\n";
  CHECK_THROWS_AS(parse_trajectory(bad, "ctx"), IoError);
}

TEST_CASE("summary is recomputable from the serialized samples") {
  auto samples = synthetic_samples(80);
  samples.back().regime = Regime::Fallen;
  FrameConfig frame;
  RunSummary direct = summarize(samples, frame);

  std::string text = trajectory_to_string(test_meta(), samples);
  TrajectoryFile parsed = parse_trajectory(text, "test");
  RunSummary replayed = summarize(parsed.samples, frame);

  CHECK(direct.max_displacement == replayed.max_displacement);
  CHECK(direct.center_distance.median == replayed.center_distance.median);
  CHECK(direct.center_distance.q1 == replayed.center_distance.q1);
  CHECK(direct.center_distance.max == replayed.center_distance.max);
  REQUIRE(direct.fall_time.has_value());
  REQUIRE(replayed.fall_time.has_value());
  CHECK(*direct.fall_time == *replayed.fall_time);
  CHECK(*direct.fall_elevation == *replayed.fall_elevation);
  REQUIRE(direct.segments.size() == replayed.segments.size());
  for (size_t i = 0; i < direct.segments.size(); ++i) {
    CHECK(direct.segments[i].regime == replayed.segments[i].regime);
    CHECK(direct.segments[i].t_start == replayed.segments[i].t_start);
    CHECK(direct.segments[i].t_end == replayed.segments[i].t_end);
  }

  // The JSON document is byte-stable too.
  CHECK(summary_to_json(direct).dump() == summary_to_json(replayed).dump());
}

TEST_CASE("checkpoint: round-trip preserves parameters exactly") {
  Rng rng = seeded_rng(9, 0);
  PolicyParams params = PolicyParams::make(10, 4, {8, 8}, rng);
  uint64_t hash = config_hash(learn_config());
  std::string text = checkpoint_to_string(params, hash);
  PolicyParams back = checkpoint_from_string(text, hash, "test");

  std::vector<double> a, b;
  params.pi.visit_params([&](double& v) { a.push_back(v); });
  back.pi.visit_params([&](double& v) { b.push_back(v); });
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (size_t j = 0; j < params.log_std.size(); ++j)
    CHECK(params.log_std[j] == back.log_std[j]);

  // Config hash mismatch is an error.
  CHECK_THROWS_AS(checkpoint_from_string(text, hash + 1, "test"), IoError);
  CHECK_THROWS_AS(checkpoint_from_string("{}", hash, "test"), IoError);
}

TEST_CASE("training log renders one row per iteration") {
  std::vector<TrainLogRow> log(2);
  log[0].iteration = 1;
  log[0].env_steps = 2048;
  log[0].mean_return = -10.5;
  log[1].iteration = 2;
  log[1].env_steps = 4096;
  std::string text = training_log_to_string(log);
  CHECK(text.find("iteration\tenv_steps") == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("-10.5") != std::string::npos);
}

TEST_CASE("success grid: perfect stub controller fills every cell") {
  // Stub environment with trivially reachable targets.
  EpisodeRunner stub = [](int cell, int repeat, const Vec2& target, Rng&) {
    CellEpisode ep;
    ep.cell = cell;
    ep.repeat = repeat;
    ep.target = target;
    ep.steps = 1;
    ep.success = true;
    return ep;
  };
  SuccessGrid grid = eval_success_grid(stub, 1.0, 7, 10, 10);
  CHECK(grid.episodes.size() == 1000);  // exactly repeats x cells
  for (double v : grid.mean_success) CHECK(v == 1.0);
}

TEST_CASE("success grid: exact per-cell averaging and determinism") {
  // Succeeds when the target lands in the lower half of its cell.
  EpisodeRunner stub = [](int cell, int repeat, const Vec2& target, Rng& rng) {
    CellEpisode ep;
    ep.cell = cell;
    ep.repeat = repeat;
    ep.target = target;
    ep.steps = 3;
    ep.success = rng.uniform() < 0.5;
    return ep;
  };
  SuccessGrid a = eval_success_grid(stub, 1.0, 11, 10, 10);
  SuccessGrid b = eval_success_grid(stub, 1.0, 11, 10, 10);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].success == b.episodes[i].success);
    CHECK(a.episodes[i].target.x == b.episodes[i].target.x);
  }
  // mean_success[c] is exactly successes / repeats.
  for (int c = 0; c < 100; ++c) {
    int wins = 0;
    for (int rep = 0; rep < 10; ++rep)
      if (a.episodes[static_cast<size_t>(c) * 10 + rep].success) ++wins;
    CHECK(a.mean_success[c] == static_cast<double>(wins) / 10.0);
  }

  // Cell subsets evaluate only the requested cells.
  SuccessGrid sub = eval_success_grid(stub, 1.0, 11, 10, 10, {0, 55, 99});
  CHECK(sub.episodes.size() == 30);
  std::set<int> seen;
  for (const auto& e : sub.episodes) seen.insert(e.cell);
  CHECK(seen == std::set<int>{0, 55, 99});
}

TEST_CASE("success grid: targets sampled inside the requested cell") {
  EpisodeRunner stub = [](int cell, int repeat, const Vec2& target, Rng&) {
    CellEpisode ep;
    ep.cell = cell;
    ep.repeat = repeat;
    ep.target = target;
    ep.success = false;
    return ep;
  };
  SuccessGrid grid = eval_success_grid(stub, 1.0, 3, 5, 10, {23});
  for (const auto& e : grid.episodes) {
    // Cell 23: cx = 3, cy = 2 on the 10x10 grid of 0.1 m cells.
    CHECK(e.target.x >= 0.3);
    CHECK(e.target.x <= 0.4);
    CHECK(e.target.y >= 0.2);
    CHECK(e.target.y <= 0.3);
  }
}

TEST_CASE("dynamics experiment: deterministic runs with coherent summaries") {
  Config cfg = default_config();
  auto results = run_dynamics_experiment(cfg, "edge", "sphere", 2, 3);
  REQUIRE(results.size() == 2);

  // The protocol is deterministic, so repeated runs are identical.
  REQUIRE(results[0].samples.size() == results[1].samples.size());
  for (size_t i = 0; i < results[0].samples.size(); i += 37) {
    CHECK(results[0].samples[i].object_position.x ==
          results[1].samples[i].object_position.x);
    CHECK(results[0].samples[i].object_position.z ==
          results[1].samples[i].object_position.z);
  }

  // Samples strictly increase in t; the summary is recomputable.
  for (size_t i = 1; i < results[0].samples.size(); ++i)
    CHECK(results[0].samples[i].t > results[0].samples[i - 1].t);
  RunSummary again = summarize(results[0].samples, cfg.frame);
  CHECK(again.max_displacement == results[0].summary.max_displacement);
  CHECK(again.segments.size() == results[0].summary.segments.size());

  // The sphere leaves the surface under this protocol.
  CHECK(results[0].summary.fall_time.has_value());

  CHECK_THROWS_AS(run_dynamics_experiment(cfg, "edge", "nope", 1, 3),
                  ConfigError);
  CHECK_THROWS_AS(run_dynamics_experiment(cfg, "spiral", "sphere", 1, 3),
                  SimError);
}

TEST_CASE("amplitude sweep: structured output and stop conditions") {
  Config cfg = default_config();
  SweepOptions opt;
  opt.duration = 4.0;  // short: structure check only
  opt.amplitude_start = 0.10;
  opt.amplitude_step = 0.15;
  auto results = run_amplitude_sweep(cfg, "cube", opt, 5);
  REQUIRE(!results.empty());
  CHECK(results.front().meta.params.at("amplitude") == "0.1");
  CHECK(results.front().meta.protocol == "circular");
  for (const auto& r : results) {
    CHECK(!r.samples.empty());
    CHECK(r.samples.back().t <= opt.duration + 0.1);
  }
  // Amplitudes never exceed the protocol validity bound.
  for (const auto& r : results)
    CHECK(std::strtod(r.meta.params.at("amplitude").c_str(), nullptr) <=
          cfg.frame.stroke / 2.0 + 1e-9);

  nlohmann::json doc = sweep_to_json(cfg, results);
  CHECK(doc["kind"] == "amplitude_sweep");
  CHECK((doc.contains("fall_amplitude") || doc.contains("no_fall_observed")));
  CHECK(doc["runs"].size() == results.size());
  // Byte-stable.
  CHECK(doc.dump() == sweep_to_json(cfg, results).dump());
}
