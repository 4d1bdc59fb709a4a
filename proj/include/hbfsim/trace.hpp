// SPDX-License-Identifier: Apache-2.0
//
// Path trace files: one propagation path per comma-separated row, e.g. the
// output of an external ray tracer.
//
//   gnb_id,ue_id,gain_re,gain_im,aod_az,aod_el,aoa_az,aoa_el,bounces,length_m
//
// Angles are in degrees. The header row is mandatory for non-empty files.

#pragma once

#include "hbfsim/channel.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace hbf {

using PathMap = std::map<std::pair<GnbId, UeId>, std::vector<PropagationPath>>;

inline constexpr std::array<const char*, 10> kTraceColumns = {
    "gnb_id", "ue_id", "gain_re", "gain_im", "aod_az", "aod_el",
    "aoa_az", "aoa_el", "bounces", "length_m"};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& s, const char* column, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(std::string("column ") + column + ": not a finite number: '" + s + "'", line);
}

inline int parse_int(const std::string& s, const char* column, std::size_t line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos == s.size()) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw ParseError(std::string("column ") + column + ": not an integer: '" + s + "'", line);
}

}  // namespace detail

/// Reads a trace. `num_gnbs` / `num_ues` bound the ids when non-negative.
inline PathMap ingest_paths(std::istream& in, int num_gnbs = -1, int num_ues = -1) {
  PathMap out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (!header_seen) {
      if (fields.size() != kTraceColumns.size())
        throw ParseError("header must list the 10 trace columns", line_no);
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] != kTraceColumns[i])
          throw ParseError("header column " + std::to_string(i + 1) + " must be '" +
                               kTraceColumns[i] + "', got '" + fields[i] + "'",
                           line_no);
      header_seen = true;
      continue;
    }
    if (fields.size() != kTraceColumns.size())
      throw ParseError("expected 10 fields, got " + std::to_string(fields.size()), line_no);

    const int gnb = detail::parse_int(fields[0], "gnb_id", line_no);
    const int ue = detail::parse_int(fields[1], "ue_id", line_no);
    PropagationPath p;
    p.gain = {detail::parse_number(fields[2], "gain_re", line_no),
              detail::parse_number(fields[3], "gain_im", line_no)};
    p.aod_az_deg = detail::parse_number(fields[4], "aod_az", line_no);
    p.aod_el_deg = detail::parse_number(fields[5], "aod_el", line_no);
    p.aoa_az_deg = detail::parse_number(fields[6], "aoa_az", line_no);
    p.aoa_el_deg = detail::parse_number(fields[7], "aoa_el", line_no);
    p.bounces = detail::parse_int(fields[8], "bounces", line_no);
    p.path_length_m = detail::parse_number(fields[9], "length_m", line_no);

    if (gnb < 0 || ue < 0) throw ParseError("ids must be non-negative", line_no);
    if (p.bounces < 0 || p.bounces > 2) throw ParseError("bounces must be in 0..2", line_no);
    if (std::abs(p.gain) == 0.0) throw ParseError("path gain must be non-zero", line_no);
    for (double az : {p.aod_az_deg, p.aoa_az_deg})
      if (az < -180.0 || az > 180.0) throw ParseError("azimuth outside [-180, 180]", line_no);
    for (double el : {p.aod_el_deg, p.aoa_el_deg})
      if (el < -90.0 || el > 90.0) throw ParseError("elevation outside [-90, 90]", line_no);
    if (!(p.path_length_m > 0.0)) throw ParseError("length_m must be positive", line_no);

    if ((num_gnbs >= 0 && gnb >= num_gnbs) || (num_ues >= 0 && ue >= num_ues))
      throw ReferenceError("line " + std::to_string(line_no) + ": unknown gNB " +
                           std::to_string(gnb) + " or UE " + std::to_string(ue));
    out[{gnb, ue}].push_back(p);
  }
  return out;
}

inline PathMap ingest_paths(const std::string& path, int num_gnbs = -1, int num_ues = -1) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path, 0);
  return ingest_paths(in, num_gnbs, num_ues);
}

inline void write_paths(std::ostream& out, const PathMap& paths) {
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i)
    out << (i ? "," : "") << kTraceColumns[i];
  out << '\n';
  char buf[512];
  for (const auto& [key, list] : paths) {
    for (const auto& p : list) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                    key.first, key.second, p.gain.real(), p.gain.imag(), p.aod_az_deg,
                    p.aod_el_deg, p.aoa_az_deg, p.aoa_el_deg, p.bounces, p.path_length_m);
      out << buf;
    }
  }
}

}  // namespace hbf
