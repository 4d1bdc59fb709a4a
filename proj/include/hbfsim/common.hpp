// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric types, error hierarchy and small helpers used across the
// simulator.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hbf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using CMatrix = Eigen::MatrixXcd;

using UeId = int;
using GnbId = int;
using BeamId = int;

inline constexpr int kNumSectors = 4;
inline constexpr double kSpeedOfLight = 299'792'458.0;

// ---------------------------------------------------------------------------
// Errors

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; `line` is 1-based (0 when not line-specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input refers to a gNB or UE that does not exist in the deployment.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a dimensional or ordering precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// More UEs placed on a panel or gNB than it has RF chains.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Aggregate effective channel is singular or too badly conditioned to invert.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(std::vector<UeId> ues, double condition)
      : std::runtime_error("rank-deficient effective channel (condition " +
                           std::to_string(condition) + ")"),
        ues_(std::move(ues)),
        condition_(condition) {}
  const std::vector<UeId>& ues() const noexcept { return ues_; }
  double condition() const noexcept { return condition_; }

 private:
  std::vector<UeId> ues_;
  double condition_;
};

/// Exhaustive search asked to solve an instance outside its guard rails.
class OracleRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Units

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an azimuth into [-180, 180).
inline double wrap_azimuth(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) {
  return lin > 0.0 ? 10.0 * std::log10(lin) : -std::numeric_limits<double>::infinity();
}
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// ---------------------------------------------------------------------------
// Random streams
//
// Every stochastic stage draws from an engine seeded by mixing the campaign
// seed with a small tuple of counters, so results never depend on the order
// in which workers pick up realizations or pairs.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <typename... Counters>
std::uint64_t derive_seed(std::uint64_t base, Counters... counters) {
  std::uint64_t s = splitmix64(base);
  ((s = splitmix64(s ^ static_cast<std::uint64_t>(counters))), ...);
  return s;
}

using Rng = std::mt19937_64;

template <typename... Counters>
Rng make_rng(std::uint64_t base, Counters... counters) {
  return Rng(derive_seed(base, counters...));
}

// ---------------------------------------------------------------------------
// Geometry

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

/// Azimuth/elevation (degrees) of the direction from `from` towards `to`.
struct Direction {
  double az_deg = 0.0;
  double el_deg = 0.0;
};

inline Direction direction(const Point3& from, const Point3& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dz = to.z - from.z;
  const double horiz = std::hypot(dx, dy);
  Direction d;
  d.az_deg = (horiz == 0.0) ? 0.0 : wrap_azimuth(rad2deg(std::atan2(dy, dx)));
  d.el_deg = rad2deg(std::atan2(dz, horiz));
  return d;
}

}  // namespace hbf
