#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/detection/events.hpp"

namespace crossmatch::io {

inline constexpr std::string_view kReadingsHeader = "t,sensor_id,x,y,z";

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError(where + ": invalid number '" + std::string(s) + "'");
  return v;
}

inline void write_readings_csv(std::ostream& os, std::span<const Reading> readings) {
  os << kReadingsHeader << '\n';
  for (const auto& r : readings)
    os << format_double(r.t) << ',' << r.sensor_id << ',' << format_double(r.value.x) << ','
       << format_double(r.value.y) << ',' << format_double(r.value.z) << '\n';
}

/// Parses the `t,sensor_id,x,y,z` schema. Errors name the offending line.
/// An empty stream or a header-only file yields no readings.
inline std::vector<Reading> read_readings_csv(std::istream& is, const std::string& source = "readings") {
  std::vector<Reading> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kReadingsHeader)
        throw ValidationError(source + ":" + std::to_string(lineno) + ": expected header '" +
                              std::string(kReadingsHeader) + "'");
      header_seen = true;
      continue;
    }
    std::string where = source + ":" + std::to_string(lineno);
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      auto p = rest.find(',');
      cols.push_back(rest.substr(0, p));
      if (p == std::string_view::npos) break;
      rest.remove_prefix(p + 1);
    }
    if (cols.size() != 5)
      throw ValidationError(where + ": expected 5 columns, got " + std::to_string(cols.size()));
    Reading r;
    r.t = parse_double(cols[0], where);
    r.sensor_id = std::string(cols[1]);
    if (r.sensor_id.empty()) throw ValidationError(where + ": empty sensor_id");
    r.value = {parse_double(cols[2], where), parse_double(cols[3], where), parse_double(cols[4], where)};
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Reading> load_readings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_readings_csv(in, path);
}

inline void save_readings_csv(const std::string& path, std::span<const Reading> readings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_readings_csv(out, readings);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace crossmatch::io
