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

#ifndef RAINFUSE_INGESTION_HPP
#define RAINFUSE_INGESTION_HPP

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/field_io.hpp"

namespace rainfuse {

/// One radial sweep: rays of gates in polar coordinates around the station.
/// Azimuth is compass convention (degrees clockwise from north).
struct RadialScan {
  struct Gate {
    double range_m = 0.0;
    double intensity = 0.0;
  };
  struct Ray {
    double azimuth_deg = 0.0;
    std::vector<Gate> gates;
  };

  Position station;
  std::int64_t timestamp = 0;
  std::vector<Ray> rays;

  bool empty() const;
};

/// Cartesian resampling result: the gridded field plus a per-cell coverage
/// flag. Cells with no gate within coverage_radius are masked to zero.
struct ResampledScan {
  RainField field;
  std::vector<std::uint8_t> covered;
};

/// Nearest-gate resampling of a radial scan onto a metric grid. Ties between
/// equidistant gates resolve to the smaller azimuth, then the smaller range.
/// The default coverage radius treats every cell as covered; pass a finite
/// radius (e.g. twice the cell size) to mask cells the scan never reached.
ResampledScan resample_radial(const RadialScan& scan, const GridSpec& grid,
                              double coverage_radius = std::numeric_limits<double>::infinity());

RadialScan read_radial_scan(const std::string& path);
void write_radial_scan(const std::string& path, const RadialScan& scan, const OutputStamp& stamp);

enum class TraceFlag { kNonReporting, kFlutterMalfunction, kUnobservableModes };

struct TimeInterval {
  double start = 0.0;
  double end = 0.0;  // half-open [start, end)

  bool contains(double t) const { return t >= start && t < end; }
};

/// Data-quality findings for one vehicle's trace.
struct TraceQualityReport {
  std::string vehicle_id;
  std::set<TraceFlag> flags;
  std::vector<TimeInterval> intervals;
};

struct ParsedTrace {
  std::vector<VehicleObservation> observations;
  std::vector<TraceQualityReport> quality;
  std::size_t malformed_rows = 0;
};

/// Trace rows are `vehicle_id, iso8601_time, lat, lon, wiper_level`.
/// Malformed rows are counted and skipped; mister rows (level 4) are parsed
/// and retained. Lat/lon are converted to grid meters by the projection.
ParsedTrace parse_vehicle_trace(const std::string& path, const LatLonProjection& projection);

struct LabelInterval;

/// Data-quality screening across vehicles. Flutter is detected from the trace
/// alone; non-reporting sensors (an all-zero trace during labeled rain) and
/// unobservable wiper modes (a reporting sensor silent through a labeled rain
/// interval) can only be flagged against ground-truth labels, so those flags
/// appear only when labels are supplied.
std::vector<TraceQualityReport> assess_trace_quality(const std::vector<VehicleObservation>& observations,
                                                     const std::vector<LabelInterval>* labels = nullptr);
void write_vehicle_trace(const std::string& path, const std::vector<VehicleObservation>& obs,
                         const LatLonProjection& projection, const OutputStamp& stamp);

struct FlutterParams {
  double toggles_per_second = 2.0;
  double min_duration_s = 5.0;
};

/// Intervals where the binary wiper state toggles at a rate no human driver
/// produces, sustained long enough to be a sensor malfunction. The trace must
/// be sorted by time and belong to one vehicle.
std::vector<TimeInterval> detect_flutter(const std::vector<VehicleObservation>& trace,
                                         const FlutterParams& params = {});

/// Observations with timestamps inside any of the intervals removed.
std::vector<VehicleObservation> remove_intervals(const std::vector<VehicleObservation>& trace,
                                                 const std::vector<TimeInterval>& intervals);

/// One vehicle's wiper evidence over one aggregation bin.
struct AggregatedWiperBin {
  std::string vehicle_id;
  TimeBin bin;
  bool on = false;
  int modal_level = 0;  // modal nonzero level; ties to the smaller level
  double x = 0.0;       // last fix in the bin
  double y = 0.0;
  double last_fix_time = 0.0;

  VehicleObservation as_observation() const {
    return {vehicle_id, last_fix_time, x, y, on ? modal_level : 0};
  }
};

/// Per-bin binary aggregation of a single vehicle's trace: on if any
/// non-mister level >= 1 occurred in the bin. The trace must be sorted by
/// time, with flutter intervals already removed.
std::vector<AggregatedWiperBin> aggregate_wiper(const std::vector<VehicleObservation>& trace,
                                                std::int64_t width = 60);

/// Gages within radius of the position (inclusive), nearest first.
std::vector<GageReading> nearest_gages(Position position, const std::vector<GageReading>& gages,
                                       double radius = 2000.0);

/// Gage rows are `station_id, lat, lon, iso8601_time, intensity_mm_h`.
std::vector<GageReading> read_gage_file(const std::string& path, const LatLonProjection& projection);
void write_gage_file(const std::string& path, const std::vector<GageReading>& gages,
                     const LatLonProjection& projection, const OutputStamp& stamp);

/// Ground-truth label rows are `vehicle_id, iso8601_start, iso8601_end,
/// raining{0,1}`; intervals are half-open.
struct LabelInterval {
  std::string vehicle_id;
  TimeInterval interval;
  bool raining = false;
};

std::vector<LabelInterval> read_label_file(const std::string& path);
void write_label_file(const std::string& path, const std::vector<LabelInterval>& labels,
                      const OutputStamp& stamp);

}  // namespace rainfuse

#endif  // RAINFUSE_INGESTION_HPP
