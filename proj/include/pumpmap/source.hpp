// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>

#include "pumpmap/common.hpp"
#include "pumpmap/config.hpp"
#include "pumpmap/rng.hpp"
#include "pumpmap/spectrum.hpp"

namespace pumpmap {

// Cosine-weighted hemisphere direction about +z. Radiance is constant, so
// the polar CDF is sin^2(theta); mean cos(theta) = 2/3.
inline Vec3 sample_lambertian(RngStream& rng) {
  double u1 = rng.uniform();
  double u2 = rng.uniform();
  double r = std::sqrt(u1);
  double z = std::sqrt(std::max(0.0, 1.0 - u1));
  double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Rectangular emitting face centred on the rod axis at z = 0, radiating
// upward into the coupling layer. Total radiant power is fixed at 1 W and
// carried as statistical weight, so every tally is per watt of pump light.
// With `na` set, emission is a Lambertian truncated to that numerical
// aperture in air and refracted into the launch medium, which models a
// fiber bundle pressed on the coupling layer; na = 0 keeps the full
// in-medium hemisphere of a bare die.
class LedSource {
 public:
  Vec3 face_center{0.0, 0.0, 0.0};
  double die_x_mm = 3.2;
  double die_y_mm = 2.6;
  double power_w = 1.0;
  double na = 0.0;
  double launch_n = 1.0; // refractive index of the medium rays start in
  std::optional<SpectrumSampler> wavelengths;

  static LedSource from_config(const Config& c, const Spectrum* emission) {
    LedSource s;
    s.face_center.x = c.get_double("source.center_x_mm", 0.0);
    s.face_center.y = c.get_double("source.center_y_mm", 0.0);
    s.die_x_mm = c.get_double("source.die_x_mm", s.die_x_mm);
    s.die_y_mm = c.get_double("source.die_y_mm", s.die_y_mm);
    s.power_w = c.get_double("source.power_w", s.power_w);
    s.na = c.get_double("source.na", s.na);
    s.launch_n = c.get_double("materials.coupling_n",
                              c.get_double("materials.quartz_n", 1.0));
    if (s.die_x_mm <= 0 || s.die_y_mm <= 0)
      throw ConfigError("invalid-config: non-positive die dimension");
    if (s.power_w <= 0) throw ConfigError("invalid-config: non-positive source power");
    if (s.na < 0 || s.na > 1) throw ConfigError("invalid-config: numerical aperture");
    if (s.launch_n < 1) throw ConfigError("invalid-config: launch index below vacuum");
    if (emission) s.wavelengths.emplace(*emission);
    return s;
  }

  // Uniform position over the face, Lambertian direction. An NA cap scales
  // the sin^2 CDF; Snell refraction into the launch medium divides the sine
  // by launch_n. Weight is the power share of one ray out of n_total.
  Ray sample_ray(RngStream& rng, uint64_t n_total) const {
    Ray ray;
    ray.origin = {face_center.x + die_x_mm * (rng.uniform() - 0.5),
                  face_center.y + die_y_mm * (rng.uniform() - 0.5), face_center.z};
    if (na > 0.0) {
      double s2 = rng.uniform() * (na / launch_n) * (na / launch_n);
      double r = std::sqrt(s2);
      double z = std::sqrt(std::max(0.0, 1.0 - s2));
      double phi = 2.0 * kPi * rng.uniform();
      ray.direction = {r * std::cos(phi), r * std::sin(phi), z};
    } else {
      ray.direction = sample_lambertian(rng);
    }
    ray.weight = power_w / static_cast<double>(n_total);
    ray.wavelength_nm = wavelengths ? wavelengths->sample(rng) : 0.0;
    return ray;
  }
};

} // namespace pumpmap
