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

#include "rainfuse/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rainfuse/errors.hpp"
#include "rainfuse/field_io.hpp"

namespace rainfuse {

bool Polygon::contains(Position p) const {
  if (vertices.size() < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
    const Position& a = vertices[i];
    const Position& b = vertices[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

void StormScenario::validate() const {
  require_valid(grid);
  if (duration <= 0) throw InputError("scenario duration must be > 0");
  for (const auto& c : cells) {
    if (c.amplitude < 0.0) throw InputError("rain cell amplitude must be >= 0");
    if (c.radius <= 0.0) throw InputError("rain cell radius must be > 0");
  }
  if (radar.bias < 0.0) throw InputError("radar bias must be >= 0");
  if (radar.lognormal_sigma < 0.0) throw InputError("radar lognormal sigma must be >= 0");
  if (fleet.n_vehicles < 0) throw InputError("fleet size must be >= 0");
  if (fleet.speed < 0.0) throw InputError("fleet speed must be >= 0");
  if (fleet.tick <= 0) throw InputError("fleet tick must be > 0");
  if (fleet.mister_rate < 0.0 || fleet.mister_rate > 1.0)
    throw InputError("mister rate must be in [0, 1]");
  require_valid(fleet.sensor);
}

double truth_intensity_at(const StormScenario& scn, double t, Position p) {
  double total = 0.0;
  for (const auto& c : scn.cells) {
    const double dx = p.x - (c.center.x + c.velocity_x * t);
    const double dy = p.y - (c.center.y + c.velocity_y * t);
    total += c.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * c.radius * c.radius));
  }
  return total;
}

RainField truth_field(const StormScenario& scn, double t) {
  scn.validate();
  if (t < 0.0 || t > static_cast<double>(scn.duration))
    throw InputError("truth time outside scenario duration");
  RainField field;
  field.grid = scn.grid;
  field.timestamp = scn.start_time + static_cast<std::int64_t>(t);
  field.intensity.resize(static_cast<std::size_t>(scn.grid.cell_count()));
  for (int cell = 0; cell < scn.grid.cell_count(); ++cell)
    field.intensity[static_cast<std::size_t>(cell)] = truth_intensity_at(scn, t, scn.grid.center(cell));
  return field;
}

RainField degrade_to_radar(const RainField& truth, const StormScenario& scn, Rng& rng) {
  require_valid(truth);
  RainField radar = truth;
  for (int cell = 0; cell < truth.grid.cell_count(); ++cell) {
    const auto idx = static_cast<std::size_t>(cell);
    const Position center = truth.grid.center(cell);
    bool missed = false;
    for (const auto& poly : scn.radar.miss_regions)
      if (poly.contains(center)) {
        missed = true;
        break;
      }
    if (missed) {
      radar.intensity[idx] = 0.0;
      continue;
    }
    const double noise = scn.radar.lognormal_sigma > 0.0 ? rng.lognormal(0.0, scn.radar.lognormal_sigma) : 1.0;
    radar.intensity[idx] = scn.radar.bias * truth.intensity[idx] * noise;
  }
  return radar;
}

namespace {

struct Waypoint {
  Position target;
};

Position random_point(const GridSpec& grid, Rng& rng) {
  const double half = grid.cell_size / 2.0;
  const double x0 = grid.origin_x - half;
  const double x1 = grid.origin_x + (grid.nx - 0.5) * grid.cell_size;
  const double y0 = grid.origin_y - half;
  const double y1 = grid.origin_y + (grid.ny - 0.5) * grid.cell_size;
  return {rng.uniform(x0, x1), rng.uniform(y0, y1)};
}

std::string vehicle_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "veh-%02d", index);
  return buf;
}

int level_for_intensity(double intensity) {
  if (intensity < 2.0) return 1;
  if (intensity < 8.0) return 2;
  return 3;
}

}  // namespace

FleetResult simulate_fleet(const StormScenario& scn) {
  scn.validate();
  FleetResult result;
  const auto n_ticks = static_cast<std::int64_t>(scn.duration / scn.fleet.tick);
  for (int v = 0; v < scn.fleet.n_vehicles; ++v) {
    Rng rng = Rng::stream(scn.seed, StreamPurpose::kFleet, static_cast<std::uint64_t>(v));
    const std::string id = vehicle_name(v);
    Position pos = random_point(scn.grid, rng);
    Position target = random_point(scn.grid, rng);
    for (std::int64_t k = 0; k <= n_ticks; ++k) {
      const double t = static_cast<double>(k * scn.fleet.tick);
      const double truth = truth_intensity_at(scn, t, pos);
      const bool raining = truth > scn.fleet.sensor.rain_threshold_tau;
      const double u = rng.uniform();
      const bool wiper_on = raining ? (u < scn.fleet.sensor.tpr) : (u >= scn.fleet.sensor.tnr);
      int level = wiper_on ? level_for_intensity(truth) : 0;
      if (scn.fleet.mister_rate > 0.0 && rng.uniform() < scn.fleet.mister_rate) level = kWiperMister;

      const double timestamp = static_cast<double>(scn.start_time) + t;
      result.observations.push_back({id, timestamp, pos.x, pos.y, level});
      result.labels.push_back({id,
                               {timestamp, timestamp + static_cast<double>(scn.fleet.tick)},
                               raining});

      // advance along the waypoint route for one tick
      double remaining = scn.fleet.speed * static_cast<double>(scn.fleet.tick);
      int hops = 0;
      while (remaining > 0.0 && hops < 64) {
        const double dist = distance(pos, target);
        if (dist <= remaining) {
          pos = target;
          remaining -= dist;
          target = random_point(scn.grid, rng);
          ++hops;
        } else {
          pos.x += (target.x - pos.x) / dist * remaining;
          pos.y += (target.y - pos.y) / dist * remaining;
          remaining = 0.0;
        }
      }
    }
  }
  return result;
}

namespace {

struct ScenarioParser {
  std::string path;
  StormScenario scn;
  std::string section;
  bool grid_seen = false;

  [[noreturn]] void fail(int line_no, const std::string& message) const {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + message);
  }

  double number(const std::string& value, int line_no) const {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      fail(line_no, "expected a number, got '" + value + "'");
    }
  }

  std::int64_t integer(const std::string& value, int line_no) const {
    try {
      return std::stoll(value);
    } catch (const std::exception&) {
      fail(line_no, "expected an integer, got '" + value + "'");
    }
  }

  void handle(const std::string& key, const std::string& value, int line_no) {
    if (section == "grid") {
      if (key == "origin_x") scn.grid.origin_x = number(value, line_no);
      else if (key == "origin_y") scn.grid.origin_y = number(value, line_no);
      else if (key == "cell_size") scn.grid.cell_size = number(value, line_no);
      else if (key == "nx") scn.grid.nx = static_cast<int>(integer(value, line_no));
      else if (key == "ny") scn.grid.ny = static_cast<int>(integer(value, line_no));
      else fail(line_no, "unknown grid key '" + key + "'");
      grid_seen = true;
    } else if (section == "storm") {
      if (key == "seed") scn.seed = static_cast<std::uint64_t>(integer(value, line_no));
      else if (key == "duration") scn.duration = integer(value, line_no);
      else if (key == "start_time") scn.start_time = integer(value, line_no);
      else fail(line_no, "unknown storm key '" + key + "'");
    } else if (section == "cell") {
      RainCell& c = scn.cells.back();
      if (key == "center_x") c.center.x = number(value, line_no);
      else if (key == "center_y") c.center.y = number(value, line_no);
      else if (key == "amplitude") c.amplitude = number(value, line_no);
      else if (key == "radius") c.radius = number(value, line_no);
      else if (key == "velocity_x") c.velocity_x = number(value, line_no);
      else if (key == "velocity_y") c.velocity_y = number(value, line_no);
      else fail(line_no, "unknown cell key '" + key + "'");
    } else if (section == "radar") {
      if (key == "bias") scn.radar.bias = number(value, line_no);
      else if (key == "lognormal_sigma") scn.radar.lognormal_sigma = number(value, line_no);
      else fail(line_no, "unknown radar key '" + key + "'");
    } else if (section == "miss") {
      if (key != "polygon") fail(line_no, "unknown miss key '" + key + "'");
      Polygon& poly = scn.radar.miss_regions.back();
      std::istringstream ss(value);
      std::string pair;
      while (ss >> pair) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos) fail(line_no, "polygon vertices must be x,y pairs");
        poly.vertices.push_back({number(pair.substr(0, comma), line_no),
                                 number(pair.substr(comma + 1), line_no)});
      }
      if (poly.vertices.size() < 3) fail(line_no, "polygon needs at least 3 vertices");
    } else if (section == "projection") {
      if (key == "lat0") scn.projection.lat0 = number(value, line_no);
      else if (key == "lon0") scn.projection.lon0 = number(value, line_no);
      else fail(line_no, "unknown projection key '" + key + "'");
    } else if (section == "fleet") {
      if (key == "n_vehicles") scn.fleet.n_vehicles = static_cast<int>(integer(value, line_no));
      else if (key == "speed") scn.fleet.speed = number(value, line_no);
      else if (key == "tick") scn.fleet.tick = integer(value, line_no);
      else if (key == "tpr") scn.fleet.sensor.tpr = number(value, line_no);
      else if (key == "tnr") scn.fleet.sensor.tnr = number(value, line_no);
      else if (key == "tau") scn.fleet.sensor.rain_threshold_tau = number(value, line_no);
      else if (key == "mister_rate") scn.fleet.mister_rate = number(value, line_no);
      else fail(line_no, "unknown fleet key '" + key + "'");
    } else {
      fail(line_no, section.empty() ? "key outside any section" : "unknown section '" + section + "'");
    }
  }
};

}  // namespace

StormScenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path);

  ScenarioParser parser;
  parser.path = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      parser.section = t.substr(1, t.size() - 2);
      if (parser.section == "cell") parser.scn.cells.emplace_back();
      if (parser.section == "miss") parser.scn.radar.miss_regions.emplace_back();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) parser.fail(line_no, "expected 'key = value' or '[section]'");
    parser.handle(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
  }
  if (!parser.grid_seen) throw InputError(path + ": scenario is missing a [grid] section");
  parser.scn.validate();
  return parser.scn;
}

std::string canonical_scenario_text(const StormScenario& scn) {
  std::ostringstream out;
  out << "grid " << format_double(scn.grid.origin_x) << " " << format_double(scn.grid.origin_y)
      << " " << format_double(scn.grid.cell_size) << " " << scn.grid.nx << " " << scn.grid.ny << "\n";
  out << "seed " << scn.seed << "\n";
  out << "start_time " << scn.start_time << "\n";
  out << "duration " << scn.duration << "\n";
  for (const auto& c : scn.cells)
    out << "cell " << format_double(c.center.x) << " " << format_double(c.center.y) << " "
        << format_double(c.amplitude) << " " << format_double(c.radius) << " "
        << format_double(c.velocity_x) << " " << format_double(c.velocity_y) << "\n";
  out << "radar " << format_double(scn.radar.bias) << " " << format_double(scn.radar.lognormal_sigma) << "\n";
  for (const auto& poly : scn.radar.miss_regions) {
    out << "miss";
    for (const auto& v : poly.vertices) out << " " << format_double(v.x) << "," << format_double(v.y);
    out << "\n";
  }
  out << "fleet " << scn.fleet.n_vehicles << " " << format_double(scn.fleet.speed) << " "
      << scn.fleet.tick << " " << format_double(scn.fleet.sensor.tpr) << " "
      << format_double(scn.fleet.sensor.tnr) << " " << format_double(scn.fleet.sensor.rain_threshold_tau)
      << " " << format_double(scn.fleet.mister_rate) << "\n";
  out << "projection " << format_double(scn.projection.lat0) << " "
      << format_double(scn.projection.lon0) << "\n";
  return out.str();
}

}  // namespace rainfuse
