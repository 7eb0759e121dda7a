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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "softsurf/experiment.hpp"
#include "softsurf/io.hpp"
#include "softsurf/ppo.hpp"

namespace fs = std::filesystem;
using namespace softsurf;

namespace {

struct GlobalOptions {
  std::string config_path;
  uint64_t seed = 0;
  std::string out_dir;

  // CLI flag beats SOFTSURF_OUT_DIR beats the current directory.
  fs::path resolve_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("SOFTSURF_OUT_DIR"); env && *env)
      return env;
    return ".";
  }

  Config load(const Config& fallback) const {
    Config cfg = fallback;
    if (!config_path.empty()) cfg = load_config(read_file(config_path));
    cfg.sim.seed = seed;
    return cfg;
  }
};

fs::path prepare_out_dir(const GlobalOptions& g) {
  fs::path dir = g.resolve_out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw IoError("cannot create output directory \"" + dir.string() + "\"");
  return dir;
}

void write_doc(const fs::path& path, const nlohmann::json& doc) {
  write_file(path.string(), doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

int run_dynamics(const GlobalOptions& g, const std::string& protocol,
                 const std::string& object, int runs) {
  Config cfg = g.load(default_config());
  fs::path dir = prepare_out_dir(g);
  auto results = run_dynamics_experiment(cfg, protocol, object, runs, g.seed);

  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "dynamics_experiment";
  doc["metadata"] = meta_to_json(results.front().meta);
  nlohmann::json run_list = nlohmann::json::array();
  for (size_t i = 0; i < results.size(); ++i) {
    std::string name = "dynamics_" + protocol + "_" + object + "_run" +
                       std::to_string(i) + ".csv";
    write_file((dir / name).string(),
               trajectory_to_string(results[i].meta, results[i].samples));
    std::cout << "wrote " << (dir / name).string() << "\n";
    run_list.push_back({{"run", i},
                        {"trajectory", name},
                        {"summary", summary_to_json(results[i].summary)}});
  }
  doc["runs"] = run_list;
  write_doc(dir / ("dynamics_" + protocol + "_" + object + "_summary.json"),
            doc);
  return 0;
}

int run_sweep(const GlobalOptions& g, const std::string& object,
              const SweepOptions& opt) {
  Config cfg = g.load(default_config());
  fs::path dir = prepare_out_dir(g);
  auto results = run_amplitude_sweep(cfg, object, opt, g.seed);
  for (const auto& r : results) {
    std::string name =
        "sweep_" + object + "_a" + r.meta.params.at("amplitude") + ".csv";
    write_file((dir / name).string(),
               trajectory_to_string(r.meta, r.samples));
    std::cout << "wrote " << (dir / name).string() << "\n";
  }
  write_doc(dir / ("sweep_" + object + ".json"), sweep_to_json(cfg, results));
  return 0;
}

int run_train(const GlobalOptions& g, long long steps, int n_envs,
              const std::string& out, bool tilt_plane) {
  Config cfg = g.load(learn_config());
  fs::path dir = prepare_out_dir(g);
  fs::path ckpt = out.empty() ? dir / "policy.json" : fs::path(out);

  TrainConfig tc;
  tc.total_steps = steps;
  tc.seed = g.seed;
  if (n_envs > 0) tc.n_envs = n_envs;
  EnvMode mode = tilt_plane ? EnvMode::TiltPlane : EnvMode::Cloth;
  uint64_t hash = config_hash(cfg);

  auto factory = [&](int) { return TargetReachEnv(cfg, {}, mode); };
  int last_saved = 0;
  TrainResult result =
      train(factory, tc, [&](const TrainLogRow& row, const PolicyParams& p) {
        std::cout << "iter " << row.iteration << "  steps " << row.env_steps
                  << "  return " << row.mean_return << "  success "
                  << row.success_rate << "  falls " << row.fall_rate << "\n";
        if (row.iteration - last_saved >= 20) {
          save_checkpoint(ckpt.string(), p, hash);
          last_saved = row.iteration;
        }
      });
  save_checkpoint(ckpt.string(), result.params, hash);
  std::cout << "wrote " << ckpt.string() << "\n";
  write_file((dir / "training_log.tsv").string(),
             training_log_to_string(result.log));
  std::cout << "wrote " << (dir / "training_log.tsv").string() << "\n";
  return 0;
}

int run_eval_grid(const GlobalOptions& g, const std::string& policy,
                  int repeats, bool tilt_plane) {
  Config cfg = g.load(learn_config());
  fs::path dir = prepare_out_dir(g);
  uint64_t hash = config_hash(cfg);

  Controller controller;
  std::string name;
  if (policy == "greedy") {
    controller = greedy_controller(cfg);
    name = "greedy";
  } else {
    controller = policy_controller(load_checkpoint(policy, hash));
    name = fs::path(policy).stem().string();
  }
  EnvMode mode = tilt_plane ? EnvMode::TiltPlane : EnvMode::Cloth;
  SuccessGrid grid =
      eval_success_grid(make_episode_runner(cfg, controller, mode),
                        cfg.frame.frame_side, g.seed, repeats);
  write_doc(dir / ("success_grid_" + name + ".json"),
            grid_to_json(grid, hash, g.seed, name));
  return 0;
}

int run_replay(const std::string& trajectory_path) {
  TrajectoryFile file =
      parse_trajectory(read_file(trajectory_path), trajectory_path);
  FrameConfig frame;  // frame geometry travels with the table
  if (auto it = file.meta.params.find("frame_side");
      it != file.meta.params.end())
    frame.frame_side = std::strtod(it->second.c_str(), nullptr);
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "replay_summary";
  doc["metadata"] = meta_to_json(file.meta);
  doc["samples"] = file.samples.size();
  doc["summary"] = summary_to_json(summarize(file.samples, frame));
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "softsurf: four-actuator soft-fabric manipulation surface simulator"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "configuration file (JSON)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out-dir", g.out_dir,
                 "output directory (default: $SOFTSURF_OUT_DIR or .)");

  auto* experiment = app.add_subcommand("experiment", "scripted experiments");
  experiment->require_subcommand(1);

  std::string protocol = "edge", object = "sphere";
  int runs = 3;
  auto* dynamics =
      experiment->add_subcommand("dynamics", "edge/diagonal elevation ramps");
  dynamics->add_option("--protocol", protocol, "edge|diagonal")
      ->check(CLI::IsMember({"edge", "diagonal"}));
  dynamics->add_option("--object", object, "catalog object name");
  dynamics->add_option("--runs", runs, "repetitions (default 3)");

  SweepOptions sweep_opt;
  std::string sweep_object = "sphere";
  auto* sweep = experiment->add_subcommand(
      "sweep", "circular-protocol amplitude sweep until the object falls");
  sweep->add_option("--object", sweep_object, "catalog object name");
  sweep->add_option("--frequency", sweep_opt.frequency, "sinusoid Hz");
  sweep->add_option("--phase-step", sweep_opt.phase_step,
                    "per-actuator phase lag (rad)");
  sweep->add_option("--duration", sweep_opt.duration, "seconds per run");
  sweep->add_option("--amplitude-start", sweep_opt.amplitude_start, "m");
  sweep->add_option("--amplitude-step", sweep_opt.amplitude_step, "m");

  long long train_steps = 300000;
  int train_envs = 0;
  std::string train_out;
  bool tilt_plane = false;
  auto* train_cmd =
      app.add_subcommand("train", "PPO target-reaching training");
  train_cmd->add_option("--steps", train_steps, "environment steps");
  train_cmd->add_option("--envs", train_envs, "parallel environments");
  train_cmd->add_option("--out", train_out, "checkpoint path");
  train_cmd->add_flag("--tilt-plane", tilt_plane,
                      "rigid tilt-plane toy world (no cloth)");

  std::string eval_policy = "greedy";
  int eval_repeats = 10;
  bool eval_tilt = false;
  auto* eval_cmd = app.add_subcommand(
      "eval-grid", "success rate over the 10x10 target sub-regions");
  eval_cmd->add_option("--policy", eval_policy,
                       "checkpoint path or \"greedy\"");
  eval_cmd->add_option("--repeats", eval_repeats, "episodes per cell");
  eval_cmd->add_flag("--tilt-plane", eval_tilt, "toy world (no cloth)");

  std::string replay_path;
  auto* replay_cmd =
      app.add_subcommand("replay", "recompute a trajectory table's summary");
  replay_cmd->add_option("--trajectory", replay_path, "trajectory CSV")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dynamics->parsed()) return run_dynamics(g, protocol, object, runs);
    if (sweep->parsed()) return run_sweep(g, sweep_object, sweep_opt);
    if (train_cmd->parsed())
      return run_train(g, train_steps, train_envs, train_out, tilt_plane);
    if (eval_cmd->parsed())
      return run_eval_grid(g, eval_policy, eval_repeats, eval_tilt);
    if (replay_cmd->parsed()) return run_replay(replay_path);
  } catch (const DivergenceError& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
