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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rainfuse/ingestion.hpp"
#include "rainfuse/rng.hpp"

using namespace rainfuse;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rainfuse_test_" + name);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// independent nearest-gate search used to cross-check the resampler
struct FlatGate {
  Position pos;
  double intensity;
  double azimuth;
  double range;
};

double brute_force_nearest(const std::vector<FlatGate>& gates, Position p) {
  const FlatGate* best = nullptr;
  double best_d2 = 0.0;
  for (const auto& g : gates) {
    const double d2 = distance_sq(p, g.pos);
    if (!best || d2 < best_d2 ||
        (d2 == best_d2 && (g.azimuth < best->azimuth ||
                           (g.azimuth == best->azimuth && g.range < best->range)))) {
      best = &g;
      best_d2 = d2;
    }
  }
  return best->intensity;
}

}  // namespace

TEST_CASE("a single gate fills every covered cell") {
  RadialScan scan;
  scan.station = {-10000.0, -10000.0};
  scan.timestamp = 100;
  // the gate lands exactly on the center of cell (2,2) of the grid below
  const double range = std::sqrt(12000.0 * 12000.0 * 2.0);
  scan.rays.push_back({45.0, {{range, 7.5}}});

  GridSpec grid{0.0, 0.0, 1000.0, 5, 5};
  const auto result = resample_radial(scan, grid);
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    CHECK(result.covered[static_cast<std::size_t>(cell)] == 1);
    CHECK(result.field.intensity[static_cast<std::size_t>(cell)] == 7.5);
  }
}

TEST_CASE("equidistant gates resolve to the smaller azimuth") {
  RadialScan scan;
  scan.station = {0.0, 0.0};
  scan.timestamp = 0;
  // two gates mirrored east/west, equidistant from every point on the y axis
  scan.rays.push_back({90.0, {{1000.0, 1.0}}});
  scan.rays.push_back({270.0, {{1000.0, 2.0}}});
  GridSpec grid{0.0, 0.0, 500.0, 1, 3};
  const auto result = resample_radial(scan, grid);
  for (double v : result.field.intensity) CHECK(v == 1.0);
}

TEST_CASE("resampling a sampled linear field tracks it to one gate spacing") {
  // gates on a dense polar lattice sample f(x, y) = x / 10000
  RadialScan scan;
  scan.station = {5000.0, 5000.0};
  scan.timestamp = 0;
  std::vector<FlatGate> flat;
  for (double az = 0.0; az < 360.0; az += 2.0) {
    RadialScan::Ray ray{az, {}};
    const double rad = az * 0.017453292519943295;
    for (double range = 250.0; range <= 9000.0; range += 250.0) {
      const Position pos{scan.station.x + range * std::sin(rad), scan.station.y + range * std::cos(rad)};
      const double intensity = std::max(0.0, pos.x / 10000.0);
      ray.gates.push_back({range, intensity});
      flat.push_back({pos, intensity, az, range});
    }
    scan.rays.push_back(ray);
  }

  GridSpec grid{2000.0, 2000.0, 1000.0, 7, 7};
  const auto result = resample_radial(scan, grid);
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    const auto idx = static_cast<std::size_t>(cell);
    REQUIRE(result.covered[idx] == 1);
    // exact agreement with an independent brute-force nearest-gate search
    CHECK(result.field.intensity[idx] == brute_force_nearest(flat, grid.center(cell)));
    // and the value is close to the analytic field
    const double expected = grid.center(cell).x / 10000.0;
    CHECK(std::abs(result.field.intensity[idx] - expected) < 0.06);
  }
}

TEST_CASE("resampling is idempotent on its own output") {
  GridSpec grid{0.0, 0.0, 1000.0, 6, 6};
  Rng rng(77);
  RainField field{grid, 0, {}};
  for (int i = 0; i < grid.cell_count(); ++i) field.intensity.push_back(rng.uniform(0.0, 12.0));

  // express the gridded field as a gate set and resample it back
  RadialScan scan;
  scan.station = {-20000.0, -20000.0};
  scan.timestamp = 0;
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    const Position c = grid.center(cell);
    const double dx = c.x - scan.station.x;
    const double dy = c.y - scan.station.y;
    double az = std::atan2(dx, dy) * 57.29577951308232;
    if (az < 0.0) az += 360.0;
    scan.rays.push_back({az, {{std::sqrt(dx * dx + dy * dy), field.intensity[static_cast<std::size_t>(cell)]}}});
  }
  const auto result = resample_radial(scan, grid);
  for (int cell = 0; cell < grid.cell_count(); ++cell)
    CHECK(result.field.intensity[static_cast<std::size_t>(cell)] ==
          field.intensity[static_cast<std::size_t>(cell)]);
}

TEST_CASE("an empty scan is an error") {
  RadialScan scan;
  scan.rays.push_back({0.0, {}});
  CHECK_THROWS_AS(resample_radial(scan, GridSpec{0, 0, 1000.0, 2, 2}), InputError);
}

TEST_CASE("a finite coverage radius masks unreached cells to zero") {
  RadialScan scan;
  scan.station = {0.0, 0.0};
  scan.timestamp = 0;
  scan.rays.push_back({90.0, {{1000.0, 5.0}}});  // one gate at (1000, 0)
  GridSpec grid{0.0, 0.0, 1000.0, 5, 1};
  const auto result = resample_radial(scan, grid, 1500.0);
  // cells at x = 0, 1000, 2000 are within 1500 m of the gate; 3000+ are not
  CHECK(result.covered[0] == 1);
  CHECK(result.covered[1] == 1);
  CHECK(result.covered[2] == 1);
  CHECK(result.covered[3] == 0);
  CHECK(result.covered[4] == 0);
  CHECK(result.field.intensity[1] == 5.0);
  CHECK(result.field.intensity[4] == 0.0);
}

TEST_CASE("radial scan files round-trip") {
  RadialScan scan;
  scan.station = {1234.5, -987.25};
  scan.timestamp = 1402586400;
  scan.rays.push_back({0.5, {{250.0, 0.0}, {500.0, 3.25}}});
  scan.rays.push_back({1.0, {{250.0, 1.125}}});
  const auto path = temp_file("scan.scan");
  write_radial_scan(path.string(), scan, {"0.0-test", "deadbeef", 1});
  const auto parsed = read_radial_scan(path.string());
  CHECK(parsed.station.x == scan.station.x);
  CHECK(parsed.station.y == scan.station.y);
  CHECK(parsed.timestamp == scan.timestamp);
  REQUIRE(parsed.rays.size() == 2);
  CHECK(parsed.rays[0].gates[1].intensity == 3.25);
  std::filesystem::remove(path);
}

TEST_CASE("radial scan validation rejects bad rows") {
  const auto path = temp_file("bad.scan");
  write_text(path, "0, 0, 100\n10.0, 500, 1.0\n10.0, 400, 1.0\n");
  CHECK_THROWS_WITH_AS(read_radial_scan(path.string()),
                       doctest::Contains("strictly increasing"), InputError);
  write_text(path, "0, 0, 100\n370.0, 500, 1.0\n");
  CHECK_THROWS_WITH_AS(read_radial_scan(path.string()), doctest::Contains("azimuth"), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("an empty trace file parses to nothing") {
  const auto path = temp_file("empty.csv");
  write_text(path, "# format: rainfuse-trace v1\n");
  const auto parsed = parse_vehicle_trace(path.string(), {42.28, -83.74});
  CHECK(parsed.observations.empty());
  CHECK(parsed.malformed_rows == 0);
  std::filesystem::remove(path);
}

TEST_CASE("mister rows are parsed and retained") {
  const auto path = temp_file("mister.csv");
  write_text(path, "veh-00, 2014-08-11T21:46:00Z, 42.281, -83.741, 4\n");
  const auto parsed = parse_vehicle_trace(path.string(), {42.28, -83.74});
  REQUIRE(parsed.observations.size() == 1);
  CHECK(parsed.observations[0].is_mister());
  CHECK_FALSE(parsed.observations[0].wiper_on());
  std::filesystem::remove(path);
}

TEST_CASE("out-of-range wiper levels are counted and skipped") {
  const auto path = temp_file("levels.csv");
  write_text(path,
             "veh-00, 2014-08-11T21:46:00Z, 42.281, -83.741, 7\n"
             "veh-00, 2014-08-11T21:46:01Z, 42.281, -83.741, 2\n"
             "not a row at all\n");
  const auto parsed = parse_vehicle_trace(path.string(), {42.28, -83.74});
  CHECK(parsed.observations.size() == 1);
  CHECK(parsed.malformed_rows == 2);
  std::filesystem::remove(path);
}

TEST_CASE("a trace with a different format tag is rejected") {
  const auto path = temp_file("wrongformat.csv");
  write_text(path, "# format: rainfuse-trace v2\nveh-00, 2014-08-11T21:46:00Z, 42.281, -83.741, 1\n");
  CHECK_THROWS_AS(parse_vehicle_trace(path.string(), {42.28, -83.74}), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("parse, serialize, parse round-trips observations bit-exactly") {
  const LatLonProjection proj{42.28, -83.74};
  const auto path1 = temp_file("trip1.csv");
  const auto path2 = temp_file("trip2.csv");
  // source file with assorted rows, including fractional seconds
  write_text(path1,
             "# format: rainfuse-trace v1\n"
             "veh-00, 2014-08-11T21:46:00Z, 42.2812345, -83.7409876, 0\n"
             "veh-00, 2014-08-11T21:46:00.480000000Z, 42.28135, -83.74101, 2\n"
             "veh-01, 2014-08-11T21:47:13Z, 42.2795, -83.7355, 4\n"
             "veh-01, 2014-08-11T21:48:13Z, 42.2901, -83.7321, 3\n");
  const auto first = parse_vehicle_trace(path1.string(), proj);
  REQUIRE(first.observations.size() == 4);
  write_vehicle_trace(path2.string(), first.observations, proj, {"0.0-test", "0", 0});
  const auto second = parse_vehicle_trace(path2.string(), proj);
  REQUIRE(second.observations.size() == first.observations.size());
  for (std::size_t i = 0; i < first.observations.size(); ++i) {
    CHECK(second.observations[i].vehicle_id == first.observations[i].vehicle_id);
    CHECK(second.observations[i].timestamp == first.observations[i].timestamp);
    CHECK(second.observations[i].x == first.observations[i].x);
    CHECK(second.observations[i].y == first.observations[i].y);
    CHECK(second.observations[i].wiper_level == first.observations[i].wiper_level);
  }
  std::filesystem::remove(path1);
  std::filesystem::remove(path2);
}

TEST_CASE("flutter detection ignores normal wiper usage") {
  std::vector<VehicleObservation> trace;
  for (int i = 0; i < 600; ++i) trace.push_back({"v", static_cast<double>(i), 0, 0, 1});
  CHECK(detect_flutter(trace).empty());

  // toggling once per minute is a human driver
  trace.clear();
  for (int i = 0; i < 30; ++i) trace.push_back({"v", i * 60.0, 0, 0, i % 2});
  CHECK(detect_flutter(trace).empty());
}

TEST_CASE("flutter detection flags millisecond toggling") {
  std::vector<VehicleObservation> trace;
  for (int i = 0; i < 1000; ++i)
    trace.push_back({"v", 100.0 + i * 0.01, 0, 0, i % 2});  // 10 ms toggling for 10 s
  const auto intervals = detect_flutter(trace);
  REQUIRE(intervals.size() == 1);
  CHECK(intervals[0].start <= 100.0);
  CHECK(intervals[0].end >= 109.9);

  const auto cleaned = remove_intervals(trace, intervals);
  CHECK(cleaned.empty());
}

TEST_CASE("flutter detection requires the malfunction to be sustained") {
  std::vector<VehicleObservation> trace;
  // two seconds of fast toggling is below the five-second threshold
  for (int i = 0; i < 200; ++i) trace.push_back({"v", 100.0 + i * 0.01, 0, 0, i % 2});
  CHECK(detect_flutter(trace).empty());
}

TEST_CASE("wiper aggregation applies any-on semantics with a modal level") {
  std::vector<VehicleObservation> trace;
  // bin 0: all zeros
  for (int i = 0; i < 5; ++i) trace.push_back({"v", i * 10.0, 100.0 * i, 0, 0});
  // bin 1: one level-2 sample among zeros
  for (int i = 0; i < 5; ++i) trace.push_back({"v", 60.0 + i * 10.0, 500.0 + 10.0 * i, 0, i == 2 ? 2 : 0});
  // bin 2: levels {1,1,3}
  trace.push_back({"v", 120.0, 900.0, 0, 1});
  trace.push_back({"v", 130.0, 910.0, 0, 1});
  trace.push_back({"v", 140.0, 920.0, 0, 3});

  const auto bins = aggregate_wiper(trace, 60);
  REQUIRE(bins.size() == 3);
  CHECK_FALSE(bins[0].on);
  CHECK(bins[0].modal_level == 0);
  CHECK(bins[1].on);
  CHECK(bins[1].modal_level == 2);
  CHECK(bins[1].x == 540.0);  // last fix in the bin
  CHECK(bins[2].on);
  CHECK(bins[2].modal_level == 1);
  CHECK(bins[2].bin.start == 120);
}

TEST_CASE("wiper aggregation treats the mister as a fix but not as evidence") {
  std::vector<VehicleObservation> trace{{"v", 10.0, 1.0, 2.0, kWiperMister},
                                        {"v", 20.0, 3.0, 4.0, 0}};
  const auto bins = aggregate_wiper(trace, 60);
  REQUIRE(bins.size() == 1);
  CHECK_FALSE(bins[0].on);
  CHECK(bins[0].x == 3.0);
}

TEST_CASE("trace quality screening flags flutter without labels") {
  std::vector<VehicleObservation> obs;
  for (int i = 0; i < 1000; ++i) obs.push_back({"bad", 100.0 + i * 0.01, 0, 0, i % 2});
  for (int i = 0; i < 20; ++i) obs.push_back({"good", 100.0 + i * 60.0, 0, 0, i < 10 ? 1 : 0});
  const auto reports = assess_trace_quality(obs);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].vehicle_id == "bad");
  CHECK(reports[0].flags.count(TraceFlag::kFlutterMalfunction) == 1);
  REQUIRE(!reports[0].intervals.empty());
}

TEST_CASE("labels expose non-reporting sensors and unobservable wiper modes") {
  std::vector<VehicleObservation> obs;
  // silent-all-trip vehicle during labeled rain: non-reporting
  for (int i = 0; i < 30; ++i) obs.push_back({"silent", i * 60.0, 0, 0, 0});
  // vehicle that reports early but misses a labeled rain interval: unobservable mode
  for (int i = 0; i < 30; ++i) obs.push_back({"partial", i * 60.0, 0, 0, i < 5 ? 2 : 0});
  // healthy vehicle matching its labels
  for (int i = 0; i < 30; ++i) obs.push_back({"healthy", i * 60.0, 0, 0, i >= 10 && i < 20 ? 1 : 0});

  std::vector<LabelInterval> labels{
      {"silent", {600.0, 1200.0}, true},
      {"partial", {600.0, 1200.0}, true},
      {"healthy", {600.0, 1200.0}, true},
  };
  const auto reports = assess_trace_quality(obs, &labels);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].vehicle_id == "partial");
  CHECK(reports[0].flags.count(TraceFlag::kUnobservableModes) == 1);
  CHECK(reports[1].vehicle_id == "silent");
  CHECK(reports[1].flags.count(TraceFlag::kNonReporting) == 1);
  // intervals are sorted and non-overlapping
  for (const auto& report : reports)
    for (std::size_t i = 1; i < report.intervals.size(); ++i)
      CHECK(report.intervals[i].start >= report.intervals[i - 1].end);
}

TEST_CASE("nearest gage search is inclusive and sorted by distance") {
  std::vector<GageReading> gages{
      {"far", 0.0, 1500.0, 0.0, 1.0},
      {"near", 0.0, 500.0, 0.0, 2.0},
      {"edge", 2000.0, 0.0, 0.0, 3.0},
      {"outside", 0.0, 2100.0, 0.0, 4.0},
  };
  const auto none = nearest_gages({50000.0, 50000.0}, gages);
  CHECK(none.empty());

  const auto found = nearest_gages({0.0, 0.0}, gages);
  REQUIRE(found.size() == 3);
  CHECK(found[0].station_id == "near");
  CHECK(found[1].station_id == "far");
  CHECK(found[2].station_id == "edge");  // exactly 2000 m is included
}

TEST_CASE("gage and label files round-trip") {
  const LatLonProjection proj{42.28, -83.74};
  const auto gpath = temp_file("gages.csv");
  write_text(gpath,
             "st-1, 42.2812, -83.7355, 2014-06-12T10:00:00Z, 1.5\n"
             "st-2, 42.2710, -83.7512, 2014-06-12T10:05:00Z, 0\n");
  const auto gages = read_gage_file(gpath.string(), proj);
  REQUIRE(gages.size() == 2);
  CHECK(gages[0].intensity == 1.5);
  const auto gpath2 = temp_file("gages2.csv");
  write_gage_file(gpath2.string(), gages, proj, {"0.0-test", "0", 0});
  const auto again = read_gage_file(gpath2.string(), proj);
  REQUIRE(again.size() == 2);
  CHECK(again[0].x == gages[0].x);
  CHECK(again[1].timestamp == gages[1].timestamp);

  const auto lpath = temp_file("labels.csv");
  std::vector<LabelInterval> labels{{"veh-00", {1000.0, 1060.0}, true},
                                    {"veh-00", {1060.0, 1120.0}, false}};
  write_label_file(lpath.string(), labels, {"0.0-test", "0", 0});
  const auto parsed = read_label_file(lpath.string());
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].raining);
  CHECK_FALSE(parsed[1].raining);
  CHECK(parsed[0].interval.start == 1000.0);

  std::filesystem::remove(gpath);
  std::filesystem::remove(gpath2);
  std::filesystem::remove(lpath);
}
