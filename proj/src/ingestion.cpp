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

#include "rainfuse/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "rainfuse/errors.hpp"

namespace rainfuse {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

struct GatePoint {
  Position pos;
  double intensity;
  double azimuth;
  double range;
};

/// Strictly better under the documented ordering: nearer wins; exact distance
/// ties go to the smaller azimuth, then the smaller range.
bool closer(double d2_a, const GatePoint& a, double d2_b, const GatePoint& b) {
  if (d2_a != d2_b) return d2_a < d2_b;
  if (a.azimuth != b.azimuth) return a.azimuth < b.azimuth;
  return a.range < b.range;
}

/// Search for a printable degree value whose parse recovers the meters value
/// bit-exactly. Values that came from a parsed file always have one; values
/// from other sources fall back to the nearest representable degree.
double invert_axis_exact(double meters, double anchor_deg, double scale) {
  const double base = anchor_deg + meters / scale;
  if ((base - anchor_deg) * scale == meters) return base;
  double up = base;
  double down = base;
  for (int i = 0; i < 4; ++i) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if ((up - anchor_deg) * scale == meters) return up;
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    if ((down - anchor_deg) * scale == meters) return down;
  }
  return base;
}

struct DegreePair {
  double lat;
  double lon;
};

DegreePair meters_to_degrees_exact(Position p, const LatLonProjection& proj) {
  const double k_lon = LatLonProjection::kMetersPerDegLat * std::cos(proj.lat0 * kDegToRad);
  return {invert_axis_exact(p.y, proj.lat0, LatLonProjection::kMetersPerDegLat),
          invert_axis_exact(p.x, proj.lon0, k_lon)};
}

}  // namespace

bool RadialScan::empty() const {
  for (const auto& ray : rays)
    if (!ray.gates.empty()) return false;
  return true;
}

ResampledScan resample_radial(const RadialScan& scan, const GridSpec& grid, double coverage_radius) {
  require_valid(grid);
  if (scan.empty()) throw InputError("radial scan has no gates");

  std::vector<GatePoint> gates;
  for (const auto& ray : scan.rays) {
    const double az = ray.azimuth_deg * kDegToRad;
    const double sx = std::sin(az);
    const double cy = std::cos(az);
    for (const auto& gate : ray.gates)
      gates.push_back({{scan.station.x + gate.range_m * sx, scan.station.y + gate.range_m * cy},
                       gate.intensity,
                       ray.azimuth_deg,
                       gate.range_m});
  }

  ResampledScan out;
  out.field.grid = grid;
  out.field.timestamp = scan.timestamp;
  out.field.intensity.assign(static_cast<std::size_t>(grid.cell_count()), 0.0);
  out.covered.assign(static_cast<std::size_t>(grid.cell_count()), 0);

  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    const Position center = grid.center(cell);
    const GatePoint* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& gate : gates) {
      const double d2 = distance_sq(center, gate.pos);
      if (!best || closer(d2, gate, best_d2, *best)) {
        best = &gate;
        best_d2 = d2;
      }
    }
    const auto idx = static_cast<std::size_t>(cell);
    if (std::sqrt(best_d2) <= coverage_radius) {
      out.covered[idx] = 1;
      out.field.intensity[idx] = best->intensity;
    }
  }
  return out;
}

RadialScan read_radial_scan(const std::string& path) {
  const auto lines = read_data_lines(path);
  if (lines.empty()) throw InputError(path + ": empty radial scan file");

  RadialScan scan;
  const auto header = split_csv(lines[0]);
  if (header.size() != 3) throw InputError(path + ": radial scan header must be station_x, station_y, timestamp");
  try {
    scan.station.x = std::stod(header[0]);
    scan.station.y = std::stod(header[1]);
    scan.timestamp = std::stoll(header[2]);
  } catch (const std::exception&) {
    throw InputError(path + ": bad radial scan header");
  }

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = split_csv(lines[i]);
    if (row.size() != 3) throw InputError(path + ": row " + std::to_string(i + 1) + " must be azimuth, range, intensity");
    double az, range, intensity;
    try {
      az = std::stod(row[0]);
      range = std::stod(row[1]);
      intensity = std::stod(row[2]);
    } catch (const std::exception&) {
      throw InputError(path + ": bad numeric value at row " + std::to_string(i + 1));
    }
    if (az < 0.0 || az >= 360.0) throw InputError(path + ": azimuth out of [0,360) at row " + std::to_string(i + 1));
    if (intensity < 0.0 || !std::isfinite(intensity))
      throw InputError(path + ": negative intensity at row " + std::to_string(i + 1));
    if (scan.rays.empty() || scan.rays.back().azimuth_deg != az)
      scan.rays.push_back({az, {}});
    auto& ray = scan.rays.back();
    if (!ray.gates.empty() && range <= ray.gates.back().range_m)
      throw InputError(path + ": ranges must be strictly increasing within a ray (row " + std::to_string(i + 1) + ")");
    ray.gates.push_back({range, intensity});
  }
  return scan;
}

void write_radial_scan(const std::string& path, const RadialScan& scan, const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# station_x_m, station_y_m, unix_time_s\n";
  out << format_double(scan.station.x) << ", " << format_double(scan.station.y) << ", "
      << scan.timestamp << "\n";
  out << "# azimuth_deg, range_m, intensity_mm_h\n";
  for (const auto& ray : scan.rays)
    for (const auto& gate : ray.gates)
      out << format_double(ray.azimuth_deg) << ", " << format_double(gate.range_m) << ", "
          << format_double(gate.intensity) << "\n";
}

ParsedTrace parse_vehicle_trace(const std::string& path, const LatLonProjection& projection) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file: " + path);

  ParsedTrace result;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      // `# format: <name> <version>` guards against feeding the wrong schema
      if (t.rfind("# format:", 0) == 0) {
        const std::string fmt = trim(t.substr(9));
        if (fmt != "rainfuse-trace v1")
          throw InputError(path + ": unsupported trace format '" + fmt + "'");
      }
      continue;
    }
    const auto row = split_csv(t);
    if (row.size() != 5) {
      ++result.malformed_rows;
      continue;
    }
    VehicleObservation obs;
    obs.vehicle_id = row[0];
    try {
      obs.timestamp = parse_iso8601(row[1]);
      const double lat = std::stod(row[2]);
      const double lon = std::stod(row[3]);
      const std::size_t consumed_pos = row[4].find_first_not_of("0123456789");
      if (row[4].empty() || consumed_pos != std::string::npos) throw InputError("bad wiper level");
      obs.wiper_level = std::stoi(row[4]);
      const Position p = projection.to_meters(lat, lon);
      obs.x = p.x;
      obs.y = p.y;
    } catch (const std::exception&) {
      ++result.malformed_rows;
      continue;
    }
    if (obs.wiper_level < 0 || obs.wiper_level > kWiperMister || !std::isfinite(obs.x) ||
        !std::isfinite(obs.y)) {
      ++result.malformed_rows;
      continue;
    }
    result.observations.push_back(std::move(obs));
  }
  return result;
}

void write_vehicle_trace(const std::string& path, const std::vector<VehicleObservation>& obs,
                         const LatLonProjection& projection, const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# format: rainfuse-trace v1\n";
  out << "# vehicle_id, iso8601_time, lat, lon, wiper_level\n";
  for (const auto& o : obs) {
    const DegreePair deg = meters_to_degrees_exact(o.position(), projection);
    out << o.vehicle_id << ", " << format_iso8601(o.timestamp) << ", " << format_double(deg.lat)
        << ", " << format_double(deg.lon) << ", " << o.wiper_level << "\n";
  }
}

std::vector<TraceQualityReport> assess_trace_quality(const std::vector<VehicleObservation>& observations,
                                                     const std::vector<LabelInterval>* labels) {
  std::map<std::string, std::vector<VehicleObservation>> by_vehicle;
  for (const auto& o : observations) by_vehicle[o.vehicle_id].push_back(o);

  std::vector<TraceQualityReport> reports;
  for (auto& [id, trace] : by_vehicle) {
    std::stable_sort(trace.begin(), trace.end(),
                     [](const VehicleObservation& a, const VehicleObservation& b) {
                       return a.timestamp < b.timestamp;
                     });
    TraceQualityReport report;
    report.vehicle_id = id;

    const auto flutter = detect_flutter(trace);
    if (!flutter.empty()) {
      report.flags.insert(TraceFlag::kFlutterMalfunction);
      report.intervals.insert(report.intervals.end(), flutter.begin(), flutter.end());
    }

    if (labels) {
      const double span_start = trace.front().timestamp;
      const double span_end = trace.back().timestamp;
      bool ever_on = false;
      for (const auto& o : trace)
        if (o.wiper_on()) ever_on = true;

      // sustained labeled rain the vehicle sat through with the wiper off;
      // short intervals are indistinguishable from ordinary misses
      constexpr double kMinSilentRain = 300.0;
      std::vector<TimeInterval> silent_rain;
      for (const auto& label : *labels) {
        if (label.vehicle_id != id || !label.raining) continue;
        if (label.interval.end - label.interval.start < kMinSilentRain) continue;
        if (label.interval.end <= span_start || label.interval.start >= span_end) continue;
        bool any_on = false;
        for (const auto& o : trace)
          if (o.wiper_on() && o.timestamp >= label.interval.start && o.timestamp < label.interval.end)
            any_on = true;
        if (!any_on) silent_rain.push_back(label.interval);
      }
      if (!silent_rain.empty()) {
        report.flags.insert(ever_on ? TraceFlag::kUnobservableModes : TraceFlag::kNonReporting);
        report.intervals.insert(report.intervals.end(), silent_rain.begin(), silent_rain.end());
      }
    }

    if (!report.flags.empty()) {
      std::sort(report.intervals.begin(), report.intervals.end(),
                [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
      // merge overlaps so the interval list is disjoint
      std::vector<TimeInterval> merged;
      for (const auto& iv : report.intervals) {
        if (!merged.empty() && iv.start <= merged.back().end)
          merged.back().end = std::max(merged.back().end, iv.end);
        else
          merged.push_back(iv);
      }
      report.intervals = std::move(merged);
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

std::vector<TimeInterval> detect_flutter(const std::vector<VehicleObservation>& trace,
                                         const FlutterParams& params) {
  // Toggle timestamps of the binarized wiper state, bucketed per second; a
  // run of >= min_duration consecutive seconds each at or above the rate is a
  // malfunction interval.
  std::vector<double> toggles;
  bool prev_on = false;
  bool have_prev = false;
  for (const auto& o : trace) {
    const bool on = o.wiper_on();
    if (have_prev && on != prev_on) toggles.push_back(o.timestamp);
    prev_on = on;
    have_prev = true;
  }
  std::vector<TimeInterval> intervals;
  if (toggles.empty()) return intervals;

  std::map<std::int64_t, int> per_second;
  for (double t : toggles) ++per_second[static_cast<std::int64_t>(std::floor(t))];

  const auto needed_run = static_cast<int>(std::ceil(params.min_duration_s));
  std::int64_t run_start = 0;
  int run_len = 0;
  std::int64_t prev_sec = std::numeric_limits<std::int64_t>::min();
  auto flush = [&]() {
    if (run_len >= needed_run)
      intervals.push_back({static_cast<double>(run_start), static_cast<double>(run_start + run_len)});
    run_len = 0;
  };
  for (const auto& [sec, count] : per_second) {
    const bool dense = count >= static_cast<int>(params.toggles_per_second);
    if (!dense || (run_len > 0 && sec != prev_sec + 1)) flush();
    if (dense) {
      if (run_len == 0) run_start = sec;
      ++run_len;
    }
    prev_sec = sec;
  }
  flush();
  return intervals;
}

std::vector<VehicleObservation> remove_intervals(const std::vector<VehicleObservation>& trace,
                                                 const std::vector<TimeInterval>& intervals) {
  std::vector<VehicleObservation> out;
  out.reserve(trace.size());
  for (const auto& o : trace) {
    bool excluded = false;
    for (const auto& iv : intervals)
      if (iv.contains(o.timestamp)) {
        excluded = true;
        break;
      }
    if (!excluded) out.push_back(o);
  }
  return out;
}

std::vector<AggregatedWiperBin> aggregate_wiper(const std::vector<VehicleObservation>& trace,
                                                std::int64_t width) {
  if (width <= 0) throw InputError("aggregation width must be > 0");
  std::vector<AggregatedWiperBin> out;
  std::vector<std::array<int, kWiperMax + 1>> counts;
  std::map<std::pair<std::string, std::int64_t>, std::size_t> index;
  for (const auto& o : trace) {
    const TimeBin bin = bin_of(o.timestamp, width);
    auto [it, inserted] = index.try_emplace({o.vehicle_id, bin.index()}, out.size());
    if (inserted) {
      AggregatedWiperBin agg;
      agg.vehicle_id = o.vehicle_id;
      agg.bin = bin;
      agg.last_fix_time = -std::numeric_limits<double>::infinity();
      out.push_back(agg);
      counts.push_back({});
    }
    AggregatedWiperBin& agg = out[it->second];
    if (o.wiper_on()) {
      agg.on = true;
      ++counts[it->second][static_cast<std::size_t>(o.wiper_level)];
    }
    if (o.timestamp >= agg.last_fix_time) {
      agg.last_fix_time = o.timestamp;
      agg.x = o.x;
      agg.y = o.y;
    }
  }
  for (std::size_t slot = 0; slot < out.size(); ++slot) {
    int best = 0;
    for (int lvl = 1; lvl <= kWiperMax; ++lvl)
      if (counts[slot][static_cast<std::size_t>(lvl)] > (best == 0 ? 0 : counts[slot][static_cast<std::size_t>(best)]))
        best = lvl;
    out[slot].modal_level = best;
  }
  std::sort(out.begin(), out.end(), [](const AggregatedWiperBin& a, const AggregatedWiperBin& b) {
    if (a.vehicle_id != b.vehicle_id) return a.vehicle_id < b.vehicle_id;
    return a.bin.start < b.bin.start;
  });
  return out;
}

std::vector<GageReading> nearest_gages(Position position, const std::vector<GageReading>& gages,
                                       double radius) {
  if (radius < 0.0) throw InputError("gage search radius must be >= 0");
  std::vector<GageReading> out;
  for (const auto& g : gages)
    if (within_range(position, g.position(), radius)) out.push_back(g);
  std::stable_sort(out.begin(), out.end(), [&](const GageReading& a, const GageReading& b) {
    const double da = distance_sq(position, a.position());
    const double db = distance_sq(position, b.position());
    if (da != db) return da < db;
    return a.station_id < b.station_id;
  });
  return out;
}

std::vector<GageReading> read_gage_file(const std::string& path, const LatLonProjection& projection) {
  std::vector<GageReading> out;
  for (const auto& line : read_data_lines(path)) {
    const auto row = split_csv(line);
    if (row.size() != 5) throw InputError(path + ": gage rows must be station_id, lat, lon, iso8601_time, intensity");
    GageReading g;
    g.station_id = row[0];
    try {
      const double lat = std::stod(row[1]);
      const double lon = std::stod(row[2]);
      g.timestamp = parse_iso8601(row[3]);
      g.intensity = std::stod(row[4]);
      const Position p = projection.to_meters(lat, lon);
      g.x = p.x;
      g.y = p.y;
    } catch (const std::exception&) {
      throw InputError(path + ": bad gage row '" + line + "'");
    }
    if (g.intensity < 0.0 || !std::isfinite(g.intensity))
      throw InputError(path + ": gage intensity must be finite and >= 0");
    out.push_back(std::move(g));
  }
  return out;
}

void write_gage_file(const std::string& path, const std::vector<GageReading>& gages,
                     const LatLonProjection& projection, const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# station_id, lat, lon, iso8601_time, intensity_mm_h\n";
  for (const auto& g : gages) {
    const DegreePair deg = meters_to_degrees_exact(g.position(), projection);
    out << g.station_id << ", " << format_double(deg.lat) << ", " << format_double(deg.lon) << ", "
        << format_iso8601(g.timestamp) << ", " << format_double(g.intensity) << "\n";
  }
}

std::vector<LabelInterval> read_label_file(const std::string& path) {
  std::vector<LabelInterval> out;
  for (const auto& line : read_data_lines(path)) {
    const auto row = split_csv(line);
    if (row.size() != 4)
      throw InputError(path + ": label rows must be vehicle_id, iso8601_start, iso8601_end, raining");
    LabelInterval label;
    label.vehicle_id = row[0];
    try {
      label.interval.start = parse_iso8601(row[1]);
      label.interval.end = parse_iso8601(row[2]);
    } catch (const std::exception&) {
      throw InputError(path + ": bad label row '" + line + "'");
    }
    if (row[3] == "1") label.raining = true;
    else if (row[3] == "0") label.raining = false;
    else throw InputError(path + ": raining flag must be 0 or 1");
    if (label.interval.end <= label.interval.start)
      throw InputError(path + ": label interval must have end > start");
    out.push_back(std::move(label));
  }
  return out;
}

void write_label_file(const std::string& path, const std::vector<LabelInterval>& labels,
                      const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# vehicle_id, iso8601_start, iso8601_end, raining\n";
  for (const auto& l : labels)
    out << l.vehicle_id << ", " << format_iso8601(l.interval.start) << ", "
        << format_iso8601(l.interval.end) << ", " << (l.raining ? 1 : 0) << "\n";
}

}  // namespace rainfuse
