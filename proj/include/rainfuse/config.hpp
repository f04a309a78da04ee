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

#ifndef RAINFUSE_CONFIG_HPP
#define RAINFUSE_CONFIG_HPP

#include <string>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/field_io.hpp"
#include "rainfuse/fusion.hpp"

namespace rainfuse {

/// Resolved run configuration for the fuse/evaluate subcommands. Parsed from
/// a `key = value` file with `[paths]`, `[grid]`, `[projection]`, `[fusion]`
/// and `[run]` sections; every field has a default so minimal configs work.
struct RunConfig {
  // [paths]
  std::vector<std::string> radar_files;  // radar_dir glob or explicit radar entries
  std::string radar_dir;
  std::string trace_file;
  std::string gage_file;
  std::string label_file;
  std::string injection_file;
  std::string scenario_file;

  // [grid] (used when radar inputs are radial scans needing resampling)
  GridSpec grid;
  bool grid_set = false;

  // [projection] (defaults match the simulator's anchor)
  LatLonProjection projection{42.28, -83.74};

  // [fusion]
  FusionConfig fusion;
  std::int64_t wiper_aggregation_width = 60;

  // [run]
  std::string out_dir = "out";
  int verbosity = 1;

  /// Canonical text of every resolved setting; hashed into output headers.
  std::string canonical_text() const;
  std::string config_hash() const;
  OutputStamp stamp() const;
};

RunConfig parse_run_config(const std::string& path);

/// Injection distribution table: rows `wiper_level, bin_lo_mm_h, bin_hi_mm_h,
/// probability`.
EmpiricalIntensityDistribution read_injection_file(const std::string& path);
void write_injection_file(const std::string& path, const EmpiricalIntensityDistribution& dist,
                          const OutputStamp& stamp);

/// Built-in fallback when no injection file is configured; matches the
/// distribution shipped in assets/injection_default.csv.
EmpiricalIntensityDistribution default_injection_distribution();

}  // namespace rainfuse

#endif  // RAINFUSE_CONFIG_HPP
