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

#ifndef RAINFUSE_SYNTHETIC_HPP
#define RAINFUSE_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/ingestion.hpp"
#include "rainfuse/rng.hpp"
#include "rainfuse/sensor_model.hpp"

namespace rainfuse {

/// Simple polygon with even-odd point containment.
struct Polygon {
  std::vector<Position> vertices;

  bool contains(Position p) const;
};

/// One advecting Gaussian rain cell.
struct RainCell {
  Position center;
  double amplitude = 0.0;  // mm/h at the center
  double radius = 1000.0;  // e-folding scale in meters
  double velocity_x = 0.0;
  double velocity_y = 0.0;
};

struct RadarDegradation {
  double bias = 1.0;
  double lognormal_sigma = 0.0;
  std::vector<Polygon> miss_regions;
};

struct FleetSpec {
  int n_vehicles = 0;
  double speed = 15.0;  // m/s
  WiperSensorModel sensor;
  std::int64_t tick = 60;       // seconds between observations
  double mister_rate = 0.0;     // chance a tick reports the mister level instead
};

/// Everything needed to generate a reproducible storm, degraded radar view,
/// and vehicle fleet at desk scale.
struct StormScenario {
  std::uint64_t seed = 0;
  GridSpec grid;
  std::int64_t start_time = 0;
  std::int64_t duration = 3600;
  std::vector<RainCell> cells;
  RadarDegradation radar;
  FleetSpec fleet;
  // anchor for the trace/gage files the simulator emits; must match the
  // projection used at ingestion for positions to round-trip
  LatLonProjection projection{42.28, -83.74};

  void validate() const;
};

/// Ground-truth intensity at an arbitrary point: superposition of the
/// advected Gaussian cells.
double truth_intensity_at(const StormScenario& scn, double t, Position p);

/// Ground-truth field at scenario-relative time t, sampled at cell centers.
RainField truth_field(const StormScenario& scn, double t);

/// Radar view of the truth: multiplicative bias and lognormal noise outside
/// the miss regions, zero inside them.
RainField degrade_to_radar(const RainField& truth, const StormScenario& scn, Rng& rng);

struct FleetResult {
  std::vector<VehicleObservation> observations;
  std::vector<LabelInterval> labels;  // one per tick, at tick resolution
};

/// Vehicles on seeded random-waypoint routes; at each tick the wiper fires
/// with probability tpr inside rain and (1 - tnr) outside. Deterministic in
/// the scenario seed, per vehicle.
FleetResult simulate_fleet(const StormScenario& scn);

/// Scenario text format: `[section]` headers with `key = value` lines;
/// `[cell]` and `[miss]` sections repeat. Errors carry line numbers.
StormScenario parse_scenario(const std::string& path);

/// Canonical text used to hash the resolved scenario.
std::string canonical_scenario_text(const StormScenario& scn);

}  // namespace rainfuse

#endif  // RAINFUSE_SYNTHETIC_HPP
