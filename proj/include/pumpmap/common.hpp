// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pumpmap {

inline constexpr double kPi = 3.14159265358979323846;

// Speed of light in mm/ns; with lengths in mm this maps 1/ns to GHz directly.
inline constexpr double kSpeedOfLightMmPerNs = 299.792458;

// Vacuum permeability, T*m/A (SI).
inline constexpr double kMu0 = 4.0e-7 * kPi;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const { return *this / norm(); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// A statistical power packet. Wavelength is carried for diagnostics even
// though the default transport path uses a single effective absorption
// coefficient per material.
struct Ray {
  Vec3 origin;
  Vec3 direction;      // unit length
  double weight = 0.0; // W
  double wavelength_nm = 0.0;
};

enum class Region : std::uint8_t {
  Air = 0,
  Coupling = 1,
  Waveguide = 2,
  Crystal = 3,
  Detector = 4,
};

inline const char* region_name(Region r) {
  switch (r) {
    case Region::Air: return "air";
    case Region::Coupling: return "coupling";
    case Region::Waveguide: return "waveguide";
    case Region::Crystal: return "crystal";
    case Region::Detector: return "detector";
  }
  return "?";
}

inline Region region_from_name(const std::string& s) {
  if (s == "air") return Region::Air;
  if (s == "coupling") return Region::Coupling;
  if (s == "waveguide") return Region::Waveguide;
  if (s == "crystal") return Region::Crystal;
  if (s == "detector") return Region::Detector;
  throw std::invalid_argument("unknown region tag: " + s);
}

// Error categories; the CLI maps these to its documented exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace pumpmap
