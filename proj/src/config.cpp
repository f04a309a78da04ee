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

#include "rainfuse/config.hpp"

#include <fstream>
#include <sstream>

#include "rainfuse/errors.hpp"
#include "rainfuse/version.hpp"

namespace rainfuse {

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  out << "radar_dir " << radar_dir << "\n";
  for (const auto& f : radar_files) out << "radar " << f << "\n";
  out << "trace " << trace_file << "\n";
  out << "gages " << gage_file << "\n";
  out << "labels " << label_file << "\n";
  out << "injection " << injection_file << "\n";
  out << "scenario " << scenario_file << "\n";
  if (grid_set)
    out << "grid " << format_double(grid.origin_x) << " " << format_double(grid.origin_y) << " "
        << format_double(grid.cell_size) << " " << grid.nx << " " << grid.ny << "\n";
  out << "projection " << format_double(projection.lat0) << " " << format_double(projection.lon0) << "\n";
  out << "kernel " << format_double(fusion.kernel.sigma) << " " << format_double(fusion.kernel.p_max)
      << " " << format_double(fusion.kernel.cutoff_sigmas) << "\n";
  out << "sensor " << format_double(fusion.sensor.tpr) << " " << format_double(fusion.sensor.tnr)
      << " " << format_double(fusion.sensor.rain_threshold_tau) << "\n";
  out << "particles " << fusion.n_particles << " " << format_double(fusion.ess_fraction) << " "
      << format_double(fusion.roughening_fraction) << "\n";
  out << "prior " << format_double(fusion.prior_epsilon) << " " << format_double(fusion.prior_cv)
      << " " << format_double(fusion.persistence_alpha) << "\n";
  out << "bins " << fusion.time_bin_width << " " << wiper_aggregation_width << "\n";
  out << "seed " << fusion.global_seed << "\n";
  return out.str();
}

std::string RunConfig::config_hash() const { return fnv1a64_hex(canonical_text()); }

OutputStamp RunConfig::stamp() const { return {kVersion, config_hash(), fusion.global_seed}; }

namespace {

struct ConfigParser {
  std::string path;
  RunConfig cfg;
  std::string section;

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
    if (section == "paths") {
      if (key == "radar_dir") cfg.radar_dir = value;
      else if (key == "radar") cfg.radar_files.push_back(value);
      else if (key == "trace") cfg.trace_file = value;
      else if (key == "gages") cfg.gage_file = value;
      else if (key == "labels") cfg.label_file = value;
      else if (key == "injection") cfg.injection_file = value;
      else if (key == "scenario") cfg.scenario_file = value;
      else fail(line_no, "unknown paths key '" + key + "'");
    } else if (section == "grid") {
      if (key == "origin_x") cfg.grid.origin_x = number(value, line_no);
      else if (key == "origin_y") cfg.grid.origin_y = number(value, line_no);
      else if (key == "cell_size") cfg.grid.cell_size = number(value, line_no);
      else if (key == "nx") cfg.grid.nx = static_cast<int>(integer(value, line_no));
      else if (key == "ny") cfg.grid.ny = static_cast<int>(integer(value, line_no));
      else fail(line_no, "unknown grid key '" + key + "'");
      cfg.grid_set = true;
    } else if (section == "projection") {
      if (key == "lat0") cfg.projection.lat0 = number(value, line_no);
      else if (key == "lon0") cfg.projection.lon0 = number(value, line_no);
      else fail(line_no, "unknown projection key '" + key + "'");
    } else if (section == "fusion") {
      if (key == "sigma") cfg.fusion.kernel.sigma = number(value, line_no);
      else if (key == "p_max") cfg.fusion.kernel.p_max = number(value, line_no);
      else if (key == "cutoff_sigmas") cfg.fusion.kernel.cutoff_sigmas = number(value, line_no);
      else if (key == "tpr") cfg.fusion.sensor.tpr = number(value, line_no);
      else if (key == "tnr") cfg.fusion.sensor.tnr = number(value, line_no);
      else if (key == "tau") cfg.fusion.sensor.rain_threshold_tau = number(value, line_no);
      else if (key == "n_particles") cfg.fusion.n_particles = static_cast<int>(integer(value, line_no));
      else if (key == "ess_fraction") cfg.fusion.ess_fraction = number(value, line_no);
      else if (key == "prior_epsilon") cfg.fusion.prior_epsilon = number(value, line_no);
      else if (key == "prior_cv") cfg.fusion.prior_cv = number(value, line_no);
      else if (key == "roughening") cfg.fusion.roughening_fraction = number(value, line_no);
      else if (key == "alpha") cfg.fusion.persistence_alpha = number(value, line_no);
      else if (key == "bin_width") cfg.fusion.time_bin_width = integer(value, line_no);
      else if (key == "aggregation_width") cfg.wiper_aggregation_width = integer(value, line_no);
      else fail(line_no, "unknown fusion key '" + key + "'");
    } else if (section == "run") {
      if (key == "seed") cfg.fusion.global_seed = static_cast<std::uint64_t>(integer(value, line_no));
      else if (key == "workers") cfg.fusion.workers = static_cast<int>(integer(value, line_no));
      else if (key == "out") cfg.out_dir = value;
      else if (key == "verbosity") cfg.verbosity = static_cast<int>(integer(value, line_no));
      else fail(line_no, "unknown run key '" + key + "'");
    } else {
      fail(line_no, section.empty() ? "key outside any section" : "unknown section '" + section + "'");
    }
  }
};

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);

  ConfigParser parser;
  parser.path = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      parser.section = t.substr(1, t.size() - 2);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) parser.fail(line_no, "expected 'key = value' or '[section]'");
    parser.handle(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
  }
  return parser.cfg;
}

EmpiricalIntensityDistribution read_injection_file(const std::string& path) {
  EmpiricalIntensityDistribution dist;
  for (const auto& line : read_data_lines(path)) {
    const auto row = split_csv(line);
    if (row.size() != 4)
      throw InputError(path + ": injection rows must be wiper_level, bin_lo_mm_h, bin_hi_mm_h, probability");
    try {
      const int level = std::stoi(row[0]);
      const double lo = std::stod(row[1]);
      const double hi = std::stod(row[2]);
      const double p = std::stod(row[3]);
      dist.per_level[level].bins.push_back({lo, hi, p});
    } catch (const std::exception&) {
      throw InputError(path + ": bad injection row '" + line + "'");
    }
  }
  dist.validate();
  return dist;
}

void write_injection_file(const std::string& path, const EmpiricalIntensityDistribution& dist,
                          const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# wiper_level, bin_lo_mm_h, bin_hi_mm_h, probability\n";
  for (const auto& [level, hist] : dist.per_level)
    for (const auto& b : hist.bins)
      out << level << ", " << format_double(b.lo) << ", " << format_double(b.hi) << ", "
          << format_double(b.probability) << "\n";
}

EmpiricalIntensityDistribution default_injection_distribution() {
  // Fitted from the bundled simulator's climatology: rain intensity at
  // wiper-on ticks, binned per reported level (~12k samples). The same table
  // ships as assets/injection_default.csv; swap in your own fit there.
  EmpiricalIntensityDistribution dist;
  dist.per_level[1] = IntensityHistogram{{
      {0.1, 0.5, 0.469},
      {0.5, 1.0, 0.260},
      {1.0, 1.5, 0.151},
      {1.5, 2.0, 0.120},
  }};
  dist.per_level[2] = IntensityHistogram{{
      {2.0, 3.0, 0.277},
      {3.0, 4.0, 0.207},
      {4.0, 6.0, 0.301},
      {6.0, 8.0, 0.215},
  }};
  dist.per_level[3] = IntensityHistogram{{
      {8.0, 10.0, 0.699},
      {10.0, 12.0, 0.301},
  }};
  return dist;
}

}  // namespace rainfuse
