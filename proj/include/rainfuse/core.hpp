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

#ifndef RAINFUSE_CORE_HPP
#define RAINFUSE_CORE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rainfuse/errors.hpp"

namespace rainfuse {

/// Planar position in local metric coordinates (easting, northing).
struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance_sq(Position a, Position b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Position a, Position b) { return std::sqrt(distance_sq(a, b)); }

/// Regular metric grid. (origin_x, origin_y) is the center of cell (0,0);
/// cell centers step by cell_size along each axis. Cells are stored row-major
/// (iy * nx + ix), which is the canonical order for every serialized field.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1000.0;
  int nx = 1;
  int ny = 1;

  bool valid() const { return cell_size > 0.0 && nx >= 1 && ny >= 1 && std::isfinite(origin_x) && std::isfinite(origin_y); }

  int cell_count() const { return nx * ny; }

  Position center(int ix, int iy) const {
    return {origin_x + ix * cell_size, origin_y + iy * cell_size};
  }

  Position center(int linear_index) const {
    return center(linear_index % nx, linear_index / nx);
  }

  int linear(int ix, int iy) const { return iy * nx + ix; }

  bool operator==(const GridSpec& other) const {
    return origin_x == other.origin_x && origin_y == other.origin_y &&
           cell_size == other.cell_size && nx == other.nx && ny == other.ny;
  }
};

inline void require_valid(const GridSpec& grid) {
  if (!grid.valid()) throw InputError("invalid grid spec");
}

struct CellIndex {
  int ix = 0;
  int iy = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Index of the cell whose center is nearest to the position, or nullopt if
/// the position lies beyond half a cell outside the grid envelope. Ties at
/// exact half-cell midpoints resolve toward the larger index.
inline std::optional<CellIndex> cell_of(Position p, const GridSpec& grid) {
  const long ix = std::lround((p.x - grid.origin_x) / grid.cell_size);
  const long iy = std::lround((p.y - grid.origin_y) / grid.cell_size);
  if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) return std::nullopt;
  return CellIndex{static_cast<int>(ix), static_cast<int>(iy)};
}

/// True iff the Euclidean distance between a and b is at most radius
/// (inclusive boundary).
inline bool within_range(Position a, Position b, double radius) {
  return distance_sq(a, b) <= radius * radius;
}

/// Half-open time bin [start, start + width).
struct TimeBin {
  std::int64_t start = 0;
  std::int64_t width = 1;

  bool contains(double t) const {
    return t >= static_cast<double>(start) && t < static_cast<double>(start + width);
  }
  std::int64_t index() const { return floor_div(start, width); }

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  bool operator==(const TimeBin&) const = default;
};

/// Bin containing timestamp t; bins are anchored at the epoch.
inline TimeBin bin_of(std::int64_t t, std::int64_t width) {
  const std::int64_t idx = TimeBin::floor_div(t, width);
  return TimeBin{idx * width, width};
}

/// Observation timestamps may carry sub-second fractions.
inline TimeBin bin_of(double t, std::int64_t width) {
  const auto idx = static_cast<std::int64_t>(std::floor(t / static_cast<double>(width)));
  return TimeBin{idx * width, width};
}

/// Gridded rainfall intensity snapshot in mm/h, row-major over the grid.
struct RainField {
  GridSpec grid;
  std::int64_t timestamp = 0;
  std::vector<double> intensity;

  double at(int ix, int iy) const { return intensity[static_cast<std::size_t>(grid.linear(ix, iy))]; }
  double& at(int ix, int iy) { return intensity[static_cast<std::size_t>(grid.linear(ix, iy))]; }
};

inline RainField make_uniform_field(const GridSpec& grid, std::int64_t timestamp, double value) {
  require_valid(grid);
  return RainField{grid, timestamp, std::vector<double>(static_cast<std::size_t>(grid.cell_count()), value)};
}

inline void require_valid(const RainField& field) {
  require_valid(field.grid);
  if (field.intensity.size() != static_cast<std::size_t>(field.grid.cell_count()))
    throw InputError("rain field size does not match grid");
  for (double v : field.intensity)
    if (!std::isfinite(v) || v < 0.0) throw InputError("rain field intensity must be finite and >= 0");
}

/// Wiper level ordinals. Levels 1..3 are increasing wipe intensity; level 4
/// is the washer-fluid mister and never counts as rain evidence.
inline constexpr int kWiperOff = 0;
inline constexpr int kWiperMax = 3;
inline constexpr int kWiperMister = 4;

struct VehicleObservation {
  std::string vehicle_id;
  double timestamp = 0.0;
  double x = 0.0;
  double y = 0.0;
  int wiper_level = 0;

  Position position() const { return {x, y}; }
  bool is_mister() const { return wiper_level == kWiperMister; }
  /// Binary evidence state; mister reads as off (it is dropped upstream).
  bool wiper_on() const { return wiper_level >= 1 && wiper_level <= kWiperMax; }
};

struct GageReading {
  std::string station_id;
  double x = 0.0;
  double y = 0.0;
  double timestamp = 0.0;
  double intensity = 0.0;

  Position position() const { return {x, y}; }
};

enum class StateSource { kGage, kRadar, kWiper, kGroundTruth };

/// Thresholded binary rainfall state at a place and time.
struct BinaryRainState {
  bool raining = false;
  StateSource source = StateSource::kGroundTruth;
  double timestamp = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Fixed local equirectangular projection anchored at (lat0, lon0).
/// Adequate over a single urban study area; geodetic datums are out of scope.
struct LatLonProjection {
  double lat0 = 0.0;
  double lon0 = 0.0;

  static constexpr double kMetersPerDegLat = 111320.0;

  Position to_meters(double lat, double lon) const {
    const double k_lon = kMetersPerDegLat * std::cos(lat0 * 0.017453292519943295);
    return {(lon - lon0) * k_lon, (lat - lat0) * kMetersPerDegLat};
  }

  void to_latlon(Position p, double& lat, double& lon) const {
    const double k_lon = kMetersPerDegLat * std::cos(lat0 * 0.017453292519943295);
    lat = lat0 + p.y / kMetersPerDegLat;
    lon = lon0 + p.x / k_lon;
  }
};

}  // namespace rainfuse

#endif  // RAINFUSE_CORE_HPP
