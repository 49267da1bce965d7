#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include "seld/error.hpp"

namespace seld {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

/// Azimuth/elevation in degrees. Azimuth is counterclockwise-positive in
/// [-180, 180), elevation in [-90, 90].
struct SphericalDoa {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

/// Unit vector; x points to azimuth 0, y to azimuth +90, z up.
struct CartesianDoa {
  double x = 1.0;
  double y = 0.0;
  double z = 0.0;

  double dot(const CartesianDoa& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Direction on the 10-degree grid. Azimuth in {-180,...,170}, elevation in
/// {-90,...,90}.
struct GridDoa {
  int azimuth_deg = 0;
  int elevation_deg = 0;

  friend bool operator==(const GridDoa&, const GridDoa&) = default;
};

inline double normalize_azimuth_deg(double az) {
  az = std::fmod(az + 180.0, 360.0);
  if (az < 0.0) az += 360.0;
  return az - 180.0;
}

inline CartesianDoa sph_to_cart(const SphericalDoa& d) {
  if (!std::isfinite(d.azimuth_deg) || !std::isfinite(d.elevation_deg))
    throw InvalidArgument("sph_to_cart: non-finite input");
  const double az = d.azimuth_deg * kRadPerDeg;
  const double el = d.elevation_deg * kRadPerDeg;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

inline CartesianDoa sph_to_cart(const GridDoa& d) {
  return sph_to_cart(SphericalDoa{static_cast<double>(d.azimuth_deg),
                                  static_cast<double>(d.elevation_deg)});
}

/// Inverse of sph_to_cart. At the poles (|el| = 90) azimuth is reported as 0.
inline SphericalDoa cart_to_sph(const CartesianDoa& v) {
  const double n = v.norm();
  if (n < 1e-12) throw DegenerateDirection("cart_to_sph: near-zero vector");
  const double el = std::asin(std::clamp(v.z / n, -1.0, 1.0)) * kDegPerRad;
  double az = 0.0;
  if (std::abs(v.x) > 1e-15 || std::abs(v.y) > 1e-15)
    az = normalize_azimuth_deg(std::atan2(v.y, v.x) * kDegPerRad);
  return {az, std::clamp(el, -90.0, 90.0)};
}

/// Normalized arithmetic mean of unit vectors. Averaging in Cartesian space
/// keeps the +-180 azimuth wrap out of the result.
inline CartesianDoa mean_direction(std::span<const CartesianDoa> vs) {
  if (vs.empty()) throw DegenerateDirection("mean_direction: empty list");
  CartesianDoa sum{0.0, 0.0, 0.0};
  for (const auto& v : vs) {
    sum.x += v.x;
    sum.y += v.y;
    sum.z += v.z;
  }
  const double n = sum.norm();
  if (n < 1e-9) throw DegenerateDirection("mean_direction: vectors cancel");
  return {sum.x / n, sum.y / n, sum.z / n};
}

/// Nearest multiple of 10 per coordinate, ties rounding half away from zero;
/// azimuth then normalized into [-180, 170].
inline GridDoa round_to_grid(const SphericalDoa& d) {
  if (!std::isfinite(d.azimuth_deg) || !std::isfinite(d.elevation_deg))
    throw InvalidArgument("round_to_grid: non-finite input");
  int az = 10 * static_cast<int>(std::lround(d.azimuth_deg / 10.0));
  int el = 10 * static_cast<int>(std::lround(std::clamp(d.elevation_deg, -90.0, 90.0) / 10.0));
  while (az >= 180) az -= 360;
  while (az < -180) az += 360;
  return {az, el};
}

/// Great-circle angle between two unit vectors, in degrees. Zero iff a = b.
inline double angular_distance_deg(const CartesianDoa& a, const CartesianDoa& b) {
  if (a.x == b.x && a.y == b.y && a.z == b.z) return 0.0;
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * kDegPerRad;
}

}  // namespace seld
