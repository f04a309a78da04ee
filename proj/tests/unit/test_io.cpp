// Copyright 2026 The Rainfuse Authors
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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rainfuse/config.hpp"
#include "rainfuse/field_io.hpp"
#include "rainfuse/rng.hpp"

using namespace rainfuse;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rainfuse_test_" + name);
}

}  // namespace

TEST_CASE("field files round-trip bit-exactly") {
  GridSpec grid{-2500.0, 370.25, 750.0, 5, 4};
  RainField field{grid, 1402586400, {}};
  Rng rng(13);
  for (int i = 0; i < grid.cell_count(); ++i)
    field.intensity.push_back(rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 40.0));
  field.intensity[3] = 1.0 / 3.0;
  field.intensity[4] = 1e-17;

  const auto path = temp_file("field.field");
  write_field(path.string(), {field, "posterior_mean_intensity", "mm_h"}, {"0.0-test", "cafe", 9});
  const auto parsed = read_field(path.string());
  CHECK(parsed.quantity == "posterior_mean_intensity");
  CHECK(parsed.units == "mm_h");
  CHECK(parsed.field.timestamp == field.timestamp);
  CHECK(parsed.field.grid == grid);
  REQUIRE(parsed.field.intensity.size() == field.intensity.size());
  for (std::size_t i = 0; i < field.intensity.size(); ++i)
    CHECK(parsed.field.intensity[i] == field.intensity[i]);
  std::filesystem::remove(path);
}

TEST_CASE("field files reject malformed contents") {
  const auto path = temp_file("badfield.field");
  {
    std::ofstream out(path);
    out << "quantity x\nunits u\ntimestamp 0\ngrid 0 0 1000 2 2\n1 2 3\n";
  }
  CHECK_THROWS_WITH_AS(read_field(path.string()), doctest::Contains("value count"), InputError);
  {
    std::ofstream out(path);
    out << "quantity x\nunits u\ntimestamp 0\n1 2 3 4\n";
  }
  CHECK_THROWS_AS(read_field(path.string()), InputError);
  CHECK_THROWS_AS(read_field("/nonexistent/rainfuse.field"), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("format_double round-trips doubles through text") {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    double v;
    switch (i % 4) {
      case 0: v = rng.uniform(0.0, 1.0); break;
      case 1: v = rng.uniform(-1e9, 1e9); break;
      case 2: v = rng.uniform(0.0, 1e-12); break;
      default: v = static_cast<double>(rng.next_u64()) / 7.0; break;
    }
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("iso8601 timestamps round-trip") {
  CHECK(parse_iso8601("2014-08-11T21:46:00Z") == 1407793560.0);
  CHECK(format_iso8601(1407793560.0) == "2014-08-11T21:46:00Z");
  CHECK(format_iso8601(parse_iso8601("1999-12-31T23:59:59Z")) == "1999-12-31T23:59:59Z");
  CHECK(format_iso8601(parse_iso8601("2016-02-29T00:00:00Z")) == "2016-02-29T00:00:00Z");

  // fractional seconds settle after one print/parse cycle
  const double t = 1407793560.0 + 0.48;
  const double reparsed = parse_iso8601(format_iso8601(t));
  CHECK(reparsed == t);

  CHECK_THROWS_AS(parse_iso8601("not a time"), InputError);
  CHECK_THROWS_AS(parse_iso8601("2014-13-01T00:00:00Z"), InputError);
  CHECK_THROWS_AS(parse_iso8601("2015-02-29T00:00:00Z"), InputError);
}

TEST_CASE("checksums are stable and content-sensitive") {
  const auto path = temp_file("sum.txt");
  {
    std::ofstream out(path);
    out << "hello rain\n";
  }
  const auto a = file_checksum(path.string());
  const auto b = file_checksum(path.string());
  CHECK(a == b);
  {
    std::ofstream out(path);
    out << "hello rain!\n";
  }
  CHECK(file_checksum(path.string()) != a);
  CHECK(fnv1a64_hex("x") != fnv1a64_hex("y"));
  std::filesystem::remove(path);
}

TEST_CASE("run configs parse with defaults and fail with line numbers") {
  const auto path = temp_file("run.cfg");
  {
    std::ofstream out(path);
    out << "[paths]\nradar_dir = /tmp/radar\ntrace = /tmp/trace.csv\n";
    out << "[fusion]\nsigma = 1500\ntpr = 0.9\nn_particles = 123\n";
    out << "[run]\nseed = 99\nworkers = 2\nout = /tmp/out\n";
  }
  const RunConfig cfg = parse_run_config(path.string());
  CHECK(cfg.radar_dir == "/tmp/radar");
  CHECK(cfg.fusion.kernel.sigma == 1500.0);
  CHECK(cfg.fusion.sensor.tpr == 0.9);
  CHECK(cfg.fusion.sensor.tnr == 0.982);  // untouched default
  CHECK(cfg.fusion.n_particles == 123);
  CHECK(cfg.fusion.global_seed == 99);
  CHECK(cfg.out_dir == "/tmp/out");

  {
    std::ofstream out(path);
    out << "[fusion]\nsigma = 1500\nnot_a_key = 3\n";
  }
  CHECK_THROWS_WITH_AS(parse_run_config(path.string()), doctest::Contains(":3:"), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("the config hash tracks every resolved value") {
  RunConfig a;
  RunConfig b;
  CHECK(a.config_hash() == b.config_hash());
  b.fusion.kernel.sigma = 999.0;
  CHECK(a.config_hash() != b.config_hash());
  RunConfig c;
  c.fusion.global_seed = 1;
  CHECK(a.config_hash() != c.config_hash());
}

TEST_CASE("injection files round-trip and validate") {
  EmpiricalIntensityDistribution dist;
  dist.per_level[1] = IntensityHistogram{{{0.1, 1.0, 0.5}, {1.0, 2.0, 0.5}}};
  dist.per_level[2] = IntensityHistogram{{{2.0, 8.0, 1.0}}};
  dist.per_level[3] = IntensityHistogram{{{8.0, 16.0, 1.0}}};
  const auto path = temp_file("inj.csv");
  write_injection_file(path.string(), dist, {"0.0-test", "0", 0});
  const auto parsed = read_injection_file(path.string());
  CHECK(parsed.per_level.at(1).bins.size() == 2);
  CHECK(parsed.per_level.at(2).bins[0].hi == 8.0);

  {
    std::ofstream out(path);
    out << "1, 0.0, 1.0, 0.7\n";  // does not sum to 1
  }
  CHECK_THROWS_AS(read_injection_file(path.string()), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("the built-in injection distribution is valid") {
  CHECK_NOTHROW(default_injection_distribution().validate());
}

TEST_CASE("the shipped injection asset matches the built-in table") {
  const auto from_file = read_injection_file(std::string(RAINFUSE_ASSET_DIR) + "/injection_default.csv");
  const auto built_in = default_injection_distribution();
  REQUIRE(from_file.per_level.size() == built_in.per_level.size());
  for (const auto& [level, hist] : built_in.per_level) {
    const auto& other = from_file.per_level.at(level);
    REQUIRE(other.bins.size() == hist.bins.size());
    for (std::size_t i = 0; i < hist.bins.size(); ++i) {
      CHECK(other.bins[i].lo == hist.bins[i].lo);
      CHECK(other.bins[i].hi == hist.bins[i].hi);
      CHECK(other.bins[i].probability == hist.bins[i].probability);
    }
  }
}
