#pragma once

#include <limits>
#include <numbers>

namespace ssqr {

// Spherical Earth, circular Keplerian orbits.
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthMuKm3PerS2 = 3.986004418e5;
inline constexpr double kSpeedOfLightKmPerS = 299792.458;
inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace ssqr
