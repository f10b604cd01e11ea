// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "pumpmap/common.hpp"
#include "pumpmap/config.hpp"
#include "pumpmap/emfield.hpp"
#include "pumpmap/tracer.hpp"
#include "pumpmap/voxelgrid.hpp"

namespace pumpmap {

// Raw overlap quadrature over region-tagged voxels, midpoint rule:
//   sum rho_i |B(c_i)|^2 h^3.
// No normalization enforced; bilinear in both factors. overlap_delta wraps
// this with the 1 W convention.
inline double overlap_integral(const VoxelGrid& grid, const FieldMap& field,
                               Region region = Region::Crystal) {
  const uint8_t tag = static_cast<uint8_t>(region);
  double s = 0.0;
  for (uint32_t k = 0; k < grid.nz; ++k)
    for (uint32_t j = 0; j < grid.ny; ++j)
      for (uint32_t i = 0; i < grid.nx; ++i) {
        size_t n = grid.index(i, j, k);
        if (grid.region[n] != tag || grid.value[n] == 0.0) continue;
        Vec3 c = grid.center(i, j, k);
        s += grid.value[n] * field.sample_b2(c.x, c.y, c.z);
      }
  return s * grid.voxel_volume();
}

// Overlap factor Delta [T^2 W]: requires the grid normalized so the region
// integral of rho is 1 W.
inline double overlap_delta(const VoxelGrid& grid, const FieldMap& field,
                            Region region = Region::Crystal) {
  double p = grid.total_in_region(region);
  if (p <= 0.0) throw NumericError("region-empty: no deposited power in region");
  if (std::abs(p - 1.0) > 1e-6)
    throw NumericError("unnormalized-input: region integral is " + std::to_string(p) +
                       " W, expected 1 W");
  return overlap_integral(grid, field, region);
}

// Uniform-pumping baseline: 1 W spread evenly over the region-tagged voxels,
//   Delta_u = (1 W / V) * sum |B|^2 h^3,
// with the identical voxel mask and quadrature as overlap_delta.
inline double uniform_delta(const VoxelGrid& grid, const FieldMap& field,
                            Region region = Region::Crystal) {
  const uint8_t tag = static_cast<uint8_t>(region);
  double b2_sum = 0.0;
  size_t n_vox = 0;
  for (uint32_t k = 0; k < grid.nz; ++k)
    for (uint32_t j = 0; j < grid.ny; ++j)
      for (uint32_t i = 0; i < grid.nx; ++i) {
        size_t n = grid.index(i, j, k);
        if (grid.region[n] != tag) continue;
        Vec3 c = grid.center(i, j, k);
        b2_sum += field.sample_b2(c.x, c.y, c.z);
        ++n_vox;
      }
  if (n_vox == 0) throw NumericError("region-empty: no voxels tagged for region");
  return b2_sum / static_cast<double>(n_vox);
}

// Spin/material constants entering the cooperativity. Order-unity spin
// projection factors are folded into the triplet yield.
struct SpinConstants {
  double gamma_e_rad_per_s_t = 1.76085963e11; // electron gyromagnetic ratio
  double triplet_yield = 0.625;
  double t1_s = 135e-6;
  double t2_s = 0.35e-6;
  double pump_wavelength_nm = 570.0;

  static SpinConstants from_config(const Config& c) {
    SpinConstants s;
    s.gamma_e_rad_per_s_t = c.get_double("spin.gamma_e_rad_per_s_t", s.gamma_e_rad_per_s_t);
    s.triplet_yield = c.get_double("spin.triplet_yield", s.triplet_yield);
    s.t1_s = c.get_double("spin.t1_s", s.t1_s);
    s.t2_s = c.get_double("spin.t2_s", s.t2_s);
    s.pump_wavelength_nm = c.get_double("spin.pump_wavelength_nm", s.pump_wavelength_nm);
    if (s.triplet_yield <= 0 || s.triplet_yield > 1.0)
      throw ConfigError("invalid-config: triplet yield must be in (0, 1]");
    if (s.t1_s <= 0 || s.t2_s <= 0 || s.pump_wavelength_nm <= 0 || s.gamma_e_rad_per_s_t <= 0)
      throw ConfigError("invalid-config: spin constants must be positive");
    return s;
  }
};

// Cooperativity of the pumped spin ensemble against the loaded mode.
// Convention: B maps carry the 1 J stored-energy normalization, Delta is the
// overlap integral in T^2 W, and
//   Gamma = gamma_e^2 Theta T1 T2 Q_L P Delta / (4 omega_opt * 1 J).
// Exactly linear in pump power and loaded Q; dimensionless.
inline double cooperativity(const SpinConstants& sc, double delta_t2w, double q_loaded,
                            double pump_power_w) {
  if (q_loaded <= 0) throw ConfigError("invalid-config: loaded Q must be positive");
  if (pump_power_w < 0) throw ConfigError("invalid-config: negative pump power");
  double omega_opt = 2.0 * kPi * 2.99792458e8 / (sc.pump_wavelength_nm * 1e-9);
  double g2 = sc.gamma_e_rad_per_s_t * sc.gamma_e_rad_per_s_t;
  return g2 * sc.triplet_yield * sc.t1_s * sc.t2_s * q_loaded * pump_power_w * delta_t2w /
         (4.0 * omega_opt);
}

// Threshold bookkeeping: a pump pulse E against the oscillation threshold
// E_th gives Gamma = E / E_th, since Gamma is linear in pump energy and
// equals 1 exactly at threshold.
inline double gamma_from_threshold(double pulse_energy, double threshold_energy) {
  if (threshold_energy <= 0) throw ConfigError("nonpositive-threshold");
  if (pulse_energy < 0) throw ConfigError("invalid-config: negative pulse energy");
  return pulse_energy / threshold_energy;
}

// Magnetic Q equivalent of the pumped gain: Qm = Q0 / Gamma.
inline double qm_from_gamma(double q_unloaded, double gamma) {
  if (q_unloaded <= 0 || gamma <= 0)
    throw ConfigError("invalid-config: Q and gamma must be positive");
  return q_unloaded / gamma;
}

// Power-meter correction factor: fraction of LED output absorbed by the
// crystal divided by the fraction arriving at the meter aperture, each from
// an independent trace of the corresponding scene. Surface absorbers
// (detector-tagged solids) count toward the crystal-side sink so that a
// scene whose "crystal" is a perfect absorber at the meter location gives
// exactly 1.
inline double correction_factor(const Scene& with_crystal, const Scene& with_meter,
                                const LedSource& source, const TraceOptions& opt) {
  TraceResult a = trace(with_crystal, source, opt, nullptr);
  TraceResult b = trace(with_meter, source, opt, nullptr);
  double num = a.absorbed_w + a.detector_w;
  double den = b.detector_w;
  if (den <= 0.0) throw NumericError("zero-detector-power: meter scene collected nothing");
  return (num / a.launched_w) / (den / b.launched_w);
}

} // namespace pumpmap
