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

#ifndef SOFTSURF_IO_HPP_
#define SOFTSURF_IO_HPP_

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "softsurf/config.hpp"
#include "softsurf/errors.hpp"
#include "softsurf/policy.hpp"
#include "softsurf/ppo.hpp"
#include "softsurf/world.hpp"

namespace softsurf {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Numeric formatting: trajectory tables carry 9 significant digits, and all
// summary statistics are computed on values pushed through that rounding so
// a replay from disk reproduces them exactly.

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline double round9(double v) { return std::strtod(format_g9(v).c_str(), nullptr); }

inline TrajectorySample round9(const TrajectorySample& s) {
  TrajectorySample r = s;
  r.t = round9(s.t);
  r.object_position = {round9(s.object_position.x), round9(s.object_position.y),
                       round9(s.object_position.z)};
  r.object_orientation = {round9(s.object_orientation.w),
                          round9(s.object_orientation.x),
                          round9(s.object_orientation.y),
                          round9(s.object_orientation.z)};
  r.object_velocity = {round9(s.object_velocity.x), round9(s.object_velocity.y),
                       round9(s.object_velocity.z)};
  for (int i = 0; i < 4; ++i) r.actuator_heights[i] = round9(s.actuator_heights[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Quantiles: linear interpolation between closest ranks on the sorted data.

struct Quantiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw SimError("quantile of empty data");
  double h = p * (static_cast<double>(sorted.size()) - 1.0);
  size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline Quantiles compute_quantiles(std::vector<double> data) {
  std::sort(data.begin(), data.end());
  Quantiles q;
  q.min = data.front();
  q.q1 = quantile_sorted(data, 0.25);
  q.median = quantile_sorted(data, 0.5);
  q.q3 = quantile_sorted(data, 0.75);
  q.max = data.back();
  return q;
}

// ---------------------------------------------------------------------------
// Trajectory tables: comment metadata, a fixed header, then one row per
// control step. Byte-stable for identical inputs.

struct RunMeta {
  uint64_t config_hash = 0;
  uint64_t seed = 0;
  std::string object;
  std::string protocol;
  std::map<std::string, std::string> params;  // sorted, deterministic
};

inline constexpr const char* kTrajectoryHeader =
    "t,x,y,z,qw,qx,qy,qz,h1,h2,h3,h4,regime";

inline std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline std::string trajectory_to_string(
    const RunMeta& meta, const std::vector<TrajectorySample>& samples) {
  std::ostringstream out;
  out << "# format_version=1\n";
  out << "# config_hash=" << hash_hex(meta.config_hash) << "\n";
  out << "# seed=" << meta.seed << "\n";
  if (!meta.object.empty()) out << "# object=" << meta.object << "\n";
  if (!meta.protocol.empty()) out << "# protocol=" << meta.protocol << "\n";
  for (const auto& [k, v] : meta.params)
    out << "# param." << k << "=" << v << "\n";
  out << kTrajectoryHeader << "\n";
  for (const auto& raw : samples) {
    TrajectorySample s = round9(raw);
    out << format_g9(s.t) << ',' << format_g9(s.object_position.x) << ','
        << format_g9(s.object_position.y) << ','
        << format_g9(s.object_position.z) << ','
        << format_g9(s.object_orientation.w) << ','
        << format_g9(s.object_orientation.x) << ','
        << format_g9(s.object_orientation.y) << ','
        << format_g9(s.object_orientation.z) << ','
        << format_g9(s.actuator_heights[0]) << ','
        << format_g9(s.actuator_heights[1]) << ','
        << format_g9(s.actuator_heights[2]) << ','
        << format_g9(s.actuator_heights[3]) << ',' << regime_name(s.regime)
        << "\n";
  }
  return out.str();
}

struct TrajectoryFile {
  RunMeta meta;
  std::vector<TrajectorySample> samples;
};

inline TrajectoryFile parse_trajectory(const std::string& text,
                                       const std::string& context) {
  TrajectoryFile file;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      std::string value = body.substr(eq + 1);
      key.erase(0, key.find_first_not_of(' '));
      if (key == "config_hash")
        file.meta.config_hash = std::strtoull(value.c_str(), nullptr, 16);
      else if (key == "seed")
        file.meta.seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "object")
        file.meta.object = value;
      else if (key == "protocol")
        file.meta.protocol = value;
      else if (key.rfind("param.", 0) == 0)
        file.meta.params[key.substr(6)] = value;
      continue;
    }
    if (!header_seen) {
      if (line != kTrajectoryHeader)
        throw IoError(context + ":" + std::to_string(line_no) +
                      ": unexpected trajectory header");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 13)
      throw IoError(context + ":" + std::to_string(line_no) +
                    ": expected 13 fields");
    auto num = [&](int i) { return std::strtod(fields[i].c_str(), nullptr); };
    TrajectorySample s;
    s.t = num(0);
    s.object_position = {num(1), num(2), num(3)};
    s.object_orientation = {num(4), num(5), num(6), num(7)};
    s.actuator_heights = {num(8), num(9), num(10), num(11)};
    s.regime = regime_from_name(fields[12]);
    file.samples.push_back(s);
  }
  if (!header_seen)
    throw IoError(context + ": missing trajectory header");
  return file;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw IoError("write failed for \"" + path + "\"");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON with the config hash of the training world.

inline nlohmann::json mlp_to_json(const Mlp& m) {
  nlohmann::json j;
  j["sizes"] = m.sizes;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back({{"w", l.w}, {"b", l.b}});
  j["layers"] = layers;
  return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp m;
  m.sizes = j.at("sizes").get<std::vector<int>>();
  for (size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    Layer layer;
    layer.in = m.sizes[l];
    layer.out = m.sizes[l + 1];
    layer.w = j.at("layers")[l].at("w").get<std::vector<double>>();
    layer.b = j.at("layers")[l].at("b").get<std::vector<double>>();
    if (layer.w.size() != static_cast<size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<size_t>(layer.out))
      throw IoError("checkpoint layer shape mismatch");
    m.layers.push_back(std::move(layer));
  }
  return m;
}

inline std::string checkpoint_to_string(const PolicyParams& params,
                                        uint64_t config_hash) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "policy_checkpoint";
  j["config_hash"] = hash_hex(config_hash);
  j["pi"] = mlp_to_json(params.pi);
  j["log_std"] = params.log_std;
  j["value"] = mlp_to_json(params.value);
  return j.dump(2) + "\n";
}

inline PolicyParams checkpoint_from_string(const std::string& text,
                                           std::optional<uint64_t> expect_hash,
                                           const std::string& context) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(context + ": " + e.what());
  }
  if (j.value("kind", "") != "policy_checkpoint")
    throw IoError(context + ": not a policy checkpoint");
  if (expect_hash) {
    uint64_t h =
        std::strtoull(j.value("config_hash", "0x0").c_str(), nullptr, 16);
    if (h != *expect_hash)
      throw IoError(context + ": checkpoint config hash " +
                    j.value("config_hash", "") +
                    " does not match the active config " +
                    hash_hex(*expect_hash));
  }
  PolicyParams p;
  p.pi = mlp_from_json(j.at("pi"));
  p.value = mlp_from_json(j.at("value"));
  p.log_std = j.at("log_std").get<std::vector<double>>();
  return p;
}

inline void save_checkpoint(const std::string& path,
                            const PolicyParams& params, uint64_t config_hash) {
  write_file(path, checkpoint_to_string(params, config_hash));
}

inline PolicyParams load_checkpoint(
    const std::string& path, std::optional<uint64_t> expect_hash = {}) {
  return checkpoint_from_string(read_file(path), expect_hash, path);
}

// ---------------------------------------------------------------------------
// Training log: row-oriented plain-text table.

inline std::string training_log_to_string(const std::vector<TrainLogRow>& log) {
  std::ostringstream out;
  out << "iteration\tenv_steps\tepisodes\tmean_return\tsuccess_rate\t"
         "fall_rate\tpolicy_loss\tvalue_loss\tentropy\n";
  for (const auto& r : log)
    out << r.iteration << '\t' << r.env_steps << '\t' << r.episodes << '\t'
        << format_g9(r.mean_return) << '\t' << format_g9(r.success_rate)
        << '\t' << format_g9(r.fall_rate) << '\t' << format_g9(r.policy_loss)
        << '\t' << format_g9(r.value_loss) << '\t' << format_g9(r.entropy)
        << "\n";
  return out.str();
}

}  // namespace softsurf

#endif  // SOFTSURF_IO_HPP_
