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

#include <set>
#include <string>

#include "softsurf/config.hpp"
#include "softsurf/rng.hpp"

using namespace softsurf;

TEST_CASE("load_config: explicit frame geometry") {
  Config c = load_config(R"({"frame": {"frame_side": 0.5, "stroke": 0.5}})");
  CHECK(c.frame.frame_side == 0.5);
  CHECK(c.frame.stroke == 0.5);
  auto corners = c.frame.corner_xy();
  CHECK(corners[0].x == 0.0);
  CHECK(corners[0].y == 0.0);
  CHECK(corners[1].x == 0.5);
  CHECK(corners[1].y == 0.0);
  CHECK(corners[2].x == 0.5);
  CHECK(corners[2].y == 0.5);
  CHECK(corners[3].x == 0.0);
  CHECK(corners[3].y == 0.5);
}

TEST_CASE("load_config: empty document gives defaults") {
  Config c = load_config("");
  CHECK(c.frame.frame_side == 0.5);
  CHECK(c.frame.stroke == 0.5);
  CHECK(c.fabric.fabric_side == 0.6);
  CHECK(c.fabric.grid_n == 25);
  CHECK(c.fabric.areal_density == 0.15);
  CHECK(c.sim.physics_dt == doctest::Approx(1.0 / 2400.0));
  CHECK(c.sim.control_hz == 60.0);
  CHECK(c.sim.gravity == 9.81);
  CHECK(c.sim.substeps_per_control() == 40);
  CHECK(c.objects.size() == 7);
  // Derived default: 1% of critical damping on the contact penalty spring.
  double m = c.fabric.particle_mass();
  CHECK(c.sim.contact_damping ==
        doctest::Approx(0.02 * std::sqrt(m * c.sim.contact_stiffness)));
}

TEST_CASE("load_config: invariant violations are named") {
  CHECK_THROWS_WITH_AS(load_config(R"({"fabric": {"grid_n": 1}})"),
                       doctest::Contains("grid_n"), ConfigError);
  CHECK_THROWS_AS(load_config(R"({"frame": {"frame_side": -1.0}})"),
                  ConfigError);
  CHECK_THROWS_AS(load_config(R"({"fabric": {"stretch_stiffness": -5.0}})"),
                  ConfigError);
}

TEST_CASE("load_config: unknown keys rejected with their path") {
  CHECK_THROWS_WITH_AS(load_config(R"({"frame": {"frameside": 0.5}})"),
                       doctest::Contains("frame.frameside"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config(R"({"typo": 1})"),
                       doctest::Contains("typo"), ConfigError);
}

TEST_CASE("load_config: parse errors carry position info") {
  try {
    load_config("{\"frame\": ");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
  }
}

TEST_CASE("load_config: physics_dt must divide the control period") {
  CHECK_THROWS_AS(load_config(R"({"sim": {"physics_dt": 0.0007}})"),
                  ConfigError);
}

TEST_CASE("config round-trip is field-exact") {
  Config c = load_config(R"({"frame": {"frame_side": 1.0},
                             "fabric": {"grid_n": 9, "damping": 0.013},
                             "sim": {"seed": 1234}})");
  Config back = load_config(serialize_config(c));
  CHECK(serialize_config(back) == serialize_config(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.frame.frame_side == c.frame.frame_side);
  CHECK(back.fabric.grid_n == c.fabric.grid_n);
  CHECK(back.fabric.damping == c.fabric.damping);
  CHECK(back.sim.seed == c.sim.seed);
  CHECK(back.objects.size() == c.objects.size());
}

TEST_CASE("object catalog entries") {
  auto cat = object_catalog();
  CHECK(cat.size() == 7);

  const auto& sphere = find_object(cat, "sphere");
  CHECK(sphere.mass == 0.0125);
  CHECK(sphere.shape.kind == ShapeKind::Sphere);
  CHECK(sphere.shape.dims.x == 0.0255);

  const auto& disk = find_object(cat, "disk");
  CHECK(disk.mass == 0.0038);
  CHECK(disk.shape.kind == ShapeKind::Cylinder);
  CHECK(disk.shape.dims.x == 0.02);
  CHECK(disk.shape.dims.z == 0.002);

  std::set<std::string> names;
  for (const auto& o : cat) names.insert(o.name);
  CHECK(names == std::set<std::string>{"sphere", "cube", "disk", "apple",
                                       "cylinder", "egg", "deburrer"});

  CHECK_THROWS_AS(find_object(cat, "unknown"), ConfigError);
}

TEST_CASE("catalog inertia is positive definite") {
  for (const auto& o : object_catalog()) {
    Vec3 inertia = o.inertia();
    CHECK(inertia.x > 0.0);
    CHECK(inertia.y > 0.0);
    CHECK(inertia.z > 0.0);
  }
}

TEST_CASE("catalog inertia formulas") {
  auto cat = object_catalog();
  const auto& sphere = find_object(cat, "sphere");
  CHECK(sphere.inertia().x ==
        doctest::Approx(0.4 * 0.0125 * 0.0255 * 0.0255));
  const auto& cube = find_object(cat, "cube");
  // Full edge 0.05: I = m a^2 / 6.
  CHECK(cube.inertia().x == doctest::Approx(0.066 * 0.05 * 0.05 / 6.0));
  const auto& deburrer = find_object(cat, "deburrer");
  CHECK(deburrer.inertia_override.has_value());
  CHECK(deburrer.inertia().z ==
        doctest::Approx(0.040 * 0.021 * 0.021));  // thin shell m r^2
}

TEST_CASE("seeded_rng determinism contract") {
  Rng a = seeded_rng(42, 0);
  Rng b = seeded_rng(42, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c = seeded_rng(42, 0);
  Rng d = seeded_rng(42, 1);
  Rng e = seeded_rng(43, 0);
  int diff_stream = 0, diff_seed = 0;
  for (int i = 0; i < 100; ++i) {
    uint64_t x = c.next_u64();
    if (x != d.next_u64()) ++diff_stream;
    Rng tmp = seeded_rng(43, 0);
    (void)tmp;
    if (x != e.next_u64()) ++diff_seed;
  }
  CHECK(diff_stream > 90);
  CHECK(diff_seed > 90);
}

TEST_CASE("seeded_rng uniformity (chi-squared, 1e5 draws)") {
  // 16 bins, df = 15; critical value at significance 0.001 is 37.697.
  const int kBins = 16;
  const int kDraws = 100000;
  for (uint64_t stream : {0ULL, 7ULL}) {
    Rng rng = seeded_rng(2024, stream);
    int counts[kBins] = {};
    for (int i = 0; i < kDraws; ++i) {
      double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      counts[static_cast<int>(u * kBins)]++;
    }
    double expected = static_cast<double>(kDraws) / kBins;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 37.697);
  }
}

TEST_CASE("normal draws have sane moments") {
  Rng rng = seeded_rng(5, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(std::fabs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("custom objects parse and validate") {
  Config c = load_config(R"({"objects": [
    {"name": "puck", "shape": {"kind": "cylinder", "radius": 0.03,
     "half_height": 0.01}, "mass": 0.05, "friction": 0.3}]})");
  CHECK(c.objects.size() == 1);
  CHECK(c.objects[0].name == "puck");
  CHECK(c.objects[0].shape.dims.z == 0.01);

  CHECK_THROWS_AS(load_config(R"({"objects": [
    {"name": "bad", "shape": {"kind": "sphere", "radius": 0.01},
     "mass": -1.0}]})"),
                  ConfigError);
  CHECK_THROWS_WITH_AS(load_config(R"({"objects": [
    {"name": "bad", "shape": {"kind": "wedge"}}]})"),
                       doctest::Contains("kind"), ConfigError);
}
