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

#ifndef RAINFUSE_FIELD_IO_HPP
#define RAINFUSE_FIELD_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rainfuse/core.hpp"

namespace rainfuse {

/// Provenance stamped into every output file: tool version, hash of the
/// resolved configuration, and the seed that produced the contents.
struct OutputStamp {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::string comment_block() const;
};

/// Gridded field text format: a small header (quantity, units, timestamp,
/// grid spec) followed by ny lines of nx values in row-major order. Values
/// are printed with enough digits to round-trip doubles bit-exactly.
struct FieldFile {
  RainField field;
  std::string quantity = "intensity";
  std::string units = "mm_h";
};

void write_field(const std::string& path, const FieldFile& file, const OutputStamp& stamp);
FieldFile read_field(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// FNV-1a 64-bit hash, hex-encoded; used for config hashes and manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ULL);
std::string fnv1a64_hex(const std::string& text);
std::string file_checksum(const std::string& path);

/// Small line-oriented helpers shared by the text parsers.
std::vector<std::string> read_data_lines(const std::string& path);
std::vector<std::string> split_csv(const std::string& line);
std::string trim(const std::string& s);

/// UTC ISO 8601 (YYYY-MM-DDTHH:MM:SS[.fffffffff]Z) <-> seconds since epoch.
/// Sub-second fractions are printed with nine digits, which round-trips
/// doubles at epoch-scale magnitudes.
double parse_iso8601(const std::string& text);
std::string format_iso8601(double t);

}  // namespace rainfuse

#endif  // RAINFUSE_FIELD_IO_HPP
