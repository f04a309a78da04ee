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

#include "rainfuse/field_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rainfuse/errors.hpp"

namespace rainfuse {

std::string OutputStamp::comment_block() const {
  std::ostringstream out;
  out << "# rainfuse " << version << "\n";
  out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
  return out.str();
}

std::string format_double(double v) {
  char buf[64];
  // %.17g always round-trips; prefer the shorter %.15g when it already does.
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::vector<std::string> read_data_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    lines.push_back(t);
  }
  return lines;
}

void write_field(const std::string& path, const FieldFile& file, const OutputStamp& stamp) {
  require_valid(file.field);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "quantity " << file.quantity << "\n";
  out << "units " << file.units << "\n";
  out << "timestamp " << file.field.timestamp << "\n";
  const GridSpec& g = file.field.grid;
  out << "grid " << format_double(g.origin_x) << " " << format_double(g.origin_y) << " "
      << format_double(g.cell_size) << " " << g.nx << " " << g.ny << "\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix) out << " ";
      out << format_double(file.field.at(ix, iy));
    }
    out << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

FieldFile read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open field file: " + path);
  FieldFile file;
  bool have_grid = false;
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    if (!have_grid) {
      std::string key;
      ss >> key;
      if (key == "quantity") {
        ss >> file.quantity;
      } else if (key == "units") {
        ss >> file.units;
      } else if (key == "timestamp") {
        if (!(ss >> file.field.timestamp)) throw InputError(path + ": bad timestamp line");
      } else if (key == "grid") {
        GridSpec& g = file.field.grid;
        if (!(ss >> g.origin_x >> g.origin_y >> g.cell_size >> g.nx >> g.ny))
          throw InputError(path + ": bad grid line");
        require_valid(g);
        have_grid = true;
        values.reserve(static_cast<std::size_t>(g.cell_count()));
      } else {
        throw InputError(path + ": unexpected header line '" + t + "'");
      }
    } else {
      double v;
      while (ss >> v) values.push_back(v);
      if (!ss.eof()) throw InputError(path + ": bad value line '" + t + "'");
    }
  }
  if (!have_grid) throw InputError(path + ": missing grid header");
  if (values.size() != static_cast<std::size_t>(file.field.grid.cell_count()))
    throw InputError(path + ": value count does not match grid");
  file.field.intensity = std::move(values);
  require_valid(file.field);
  return file;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(text.data(), text.size()));
  return buf;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file for checksum: " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Howard Hinnant's days-from-civil.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

double parse_iso8601(const std::string& text) {
  int y, mo, d, h, mi;
  double s;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lfZ", &y, &mo, &d, &h, &mi, &s) != 6 &&
      std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%lf", &y, &mo, &d, &h, &mi, &s) != 6)
    throw InputError("bad ISO 8601 timestamp: '" + text + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0.0 || s >= 61.0)
    throw InputError("out-of-range ISO 8601 timestamp: '" + text + "'");
  static const int mdays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const int dmax = (mo == 2 && is_leap(y)) ? 29 : mdays[mo - 1];
  if (d > dmax) throw InputError("out-of-range ISO 8601 timestamp: '" + text + "'");
  const std::int64_t base = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60;
  return static_cast<double>(base) + s;
}

std::string format_iso8601(double t) {
  const double whole_d = std::floor(t);
  const auto whole = static_cast<std::int64_t>(whole_d);
  const double frac = t - whole_d;
  std::int64_t days = TimeBin::floor_div(whole, 86400);
  const std::int64_t secs = whole - days * 86400;
  // civil-from-days, inverse of the above
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[80];
  if (frac == 0.0) {
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y + (m <= 2)), m, d, static_cast<long long>(secs / 3600),
                  static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
  } else {
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%012.9fZ",
                  static_cast<long long>(y + (m <= 2)), m, d, static_cast<long long>(secs / 3600),
                  static_cast<long long>((secs / 60) % 60), static_cast<double>(secs % 60) + frac);
  }
  return buf;
}

}  // namespace rainfuse
