// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "pumpmap/config.hpp"
#include "pumpmap/emfield.hpp"
#include "test_util.hpp"

using namespace pumpmap;
using namespace pumpmap::testutil;
using Catch::Approx;

namespace {

CavitySpec empty_cavity() {
  CavitySpec s;
  s.radius_mm = 40.0;
  s.height_mm = 30.0;
  s.ring_eps = 1.0;
  s.support_eps = 1.0;
  s.mesh_pitch_mm = 0.5;
  s.target_ghz = 6.77;
  return s;
}

CavitySpec ring_cavity() {
  return CavitySpec::from_config(Config::from_file(repo_path("configs/cavity.cfg")));
}

// First interior mode of the empty PEC cylinder with E = E_phi(r,z)sin only:
// E ~ J1(j11 r/a) sin(pi z/L), f = (c/2pi) sqrt((j11/a)^2 + (pi/L)^2).
double te011_ghz(double a, double L) {
  const double j11 = 3.8317059702075123; // first zero of J1
  double k = std::sqrt((j11 / a) * (j11 / a) + (kPi / L) * (kPi / L));
  return k * kSpeedOfLightMmPerNs / (2.0 * kPi);
}

} // namespace

TEST_CASE("empty cylindrical cavity reproduces the analytic TE011 mode") {
  CavitySpec s = empty_cavity();
  ModeResult m = solve_te0_mode(s);
  double f_exact = te011_ghz(s.radius_mm, s.height_mm);
  CHECK(f_exact == Approx(6.7718).margin(5e-4));
  CHECK(std::abs(m.freq_ghz - f_exact) / f_exact < 0.005);
  CHECK(m.residual <= 1e-8);

  // Mesh refinement moves the eigenvalue toward the analytic one.
  ModeResult m_fine = solve_te0_mode(s, 0.25);
  CHECK(std::abs(m_fine.freq_ghz - f_exact) < std::abs(m.freq_ghz - f_exact));
}

TEST_CASE("field map respects the axisymmetric TE structure") {
  CavitySpec s = empty_cavity();
  ModeResult m = solve_te0_mode(s);
  const FieldMap& f = m.field;
  REQUIRE(f.nr >= 2);
  // B_r = -dE/dz vanishes on the axis where E is identically zero.
  for (uint32_t j = 0; j < f.nz; ++j) CHECK(f.br[f.idx(0, j)] == 0.0);
  // B_z on the axis at mid-height is the field maximum region: nonzero.
  CHECK(std::abs(f.bz[f.idx(0, f.nz / 2)]) > 0.0);
  // E_phi is zero on every boundary node.
  uint32_t nrn = f.nr, nzn = f.nz;
  for (uint32_t i = 0; i < nrn; ++i) {
    CHECK(m.e_phi[size_t(0) * nrn + i] == 0.0);
    CHECK(m.e_phi[size_t(nzn - 1) * nrn + i] == 0.0);
  }
  for (uint32_t j = 0; j < nzn; ++j) CHECK(m.e_phi[size_t(j) * nrn + nrn - 1] == 0.0);
  // Solver output carries exactly 1 J of stored magnetic energy.
  CHECK(f.energy_joules() == Approx(1.0).margin(1e-9));
  CHECK(f.freq_ghz == m.freq_ghz);
}

TEST_CASE("fmp1 files round-trip bitwise") {
  ModeResult m = solve_te0_mode(empty_cavity());
  std::string path = "/tmp/pumpmap_emfield_test.fmp";
  m.field.write(path);
  FieldMap back = FieldMap::read(path);
  CHECK(back.nr == m.field.nr);
  CHECK(back.nz == m.field.nz);
  CHECK(back.dr == m.field.dr);
  CHECK(back.dz == m.field.dz);
  CHECK(back.freq_ghz == m.field.freq_ghz);
  CHECK(back.br == m.field.br);
  CHECK(back.bz == m.field.bz);
  std::remove(path.c_str());
}

TEST_CASE("imports renormalize off-convention maps and say so") {
  ModeResult m = solve_te0_mode(empty_cavity());
  FieldMap f = m.field;
  for (auto& v : f.br) v *= std::sqrt(2.0);
  for (auto& v : f.bz) v *= std::sqrt(2.0);
  std::string path = "/tmp/pumpmap_emfield_2j.fmp";
  f.write(path);
  auto [back, renormed] = import_field_map(path);
  CHECK(renormed);
  CHECK(back.energy_joules() == Approx(1.0).margin(1e-9));

  m.field.write(path);
  auto [back2, renormed2] = import_field_map(path);
  CHECK_FALSE(renormed2);
  std::remove(path.c_str());
}

TEST_CASE("sample_b2 interpolates the node values") {
  ModeResult m = solve_te0_mode(empty_cavity());
  const FieldMap& f = m.field;
  uint32_t i = f.nr / 3, j = f.nz / 2;
  double r = f.r0 + i * f.dr, z = f.z0 + j * f.dz;
  double node = f.br[f.idx(i, j)] * f.br[f.idx(i, j)] + f.bz[f.idx(i, j)] * f.bz[f.idx(i, j)];
  CHECK(f.sample_b2(r, 0.0, z) == Approx(node).margin(1e-18));
  // Rotation about the axis is a no-op.
  CHECK(f.sample_b2(0.0, r, z) == Approx(f.sample_b2(r, 0.0, z)).margin(1e-18));
  // Midpoint in r: bilinear average of adjacent node components, squared.
  double brm = 0.5 * (f.br[f.idx(i, j)] + f.br[f.idx(i + 1, j)]);
  double bzm = 0.5 * (f.bz[f.idx(i, j)] + f.bz[f.idx(i + 1, j)]);
  CHECK(f.sample_b2(r + 0.5 * f.dr, 0.0, z) == Approx(brm * brm + bzm * bzm).margin(1e-18));
  // Outside the cavity volume the field is zero.
  CHECK(f.sample_b2(f.r0 + f.nr * f.dr, 0.0, z) == 0.0);
  CHECK(f.sample_b2(r, 0.0, f.z0 - 1.0) == 0.0);
}

TEST_CASE("energy normalization is idempotent") {
  ModeResult m = solve_te0_mode(empty_cavity());
  FieldMap f = m.field;
  f.normalize_energy(1.0);
  CHECK(f.energy_joules() == Approx(1.0).margin(1e-12));
  std::vector<double> br = f.br;
  f.normalize_energy(1.0);
  for (size_t k = 0; k < br.size(); k += 997)
    CHECK(f.br[k] == Approx(br[k]).margin(1e-12 * (1.0 + std::abs(br[k]))));
}

TEST_CASE("loaded-cavity mode concentrates in the ring and tunes by ceiling height") {
  CavitySpec s = ring_cavity();
  ModeResult lo = solve_te0_mode(s, 0.0, 0.0);
  CHECK(lo.ring_energy_fraction > 0.9);
  CHECK(lo.residual <= 1e-8);

  // Frequency falls monotonically as the ceiling rises.
  CavitySpec s2 = s;
  s2.height_mm = s.height_mm + 2.0;
  ModeResult hi = solve_te0_mode(s2, 0.0, 0.0);
  CHECK(hi.freq_ghz < lo.freq_ghz);

  TuneResult t = tune_ceiling(s, s.target_ghz, 11.0, 25.0);
  CHECK(std::abs(t.mode.freq_ghz - s.target_ghz) <= 5e-4);
  CHECK(t.spec.height_mm > 11.0);
  CHECK(t.spec.height_mm < 25.0);
  CHECK(t.mode.ring_energy_fraction > 0.5);
}

TEST_CASE("tuning rejects unreachable targets") {
  CavitySpec s = ring_cavity();
  CHECK_THROWS_AS(tune_ceiling(s, 3.0, 11.0, 25.0), NumericError);
  CHECK_THROWS_AS(tune_ceiling(s, 1.4496, 25.0, 11.0), ConfigError);
}

TEST_CASE("solver guards its discretization") {
  CavitySpec s = ring_cavity();
  CHECK_THROWS_AS(solve_te0_mode(s, 0.5), NumericError); // < 8 cells across the ring wall
  CavitySpec e = empty_cavity();
  e.target_ghz = 2.0; // far below the first mode of this cylinder
  CHECK_THROWS_AS(solve_te0_mode(e), NumericError);
}

TEST_CASE("cavity spec validation") {
  CavitySpec s = ring_cavity();
  s.ring_outer_r_mm = s.ring_inner_r_mm;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CavitySpec s2 = ring_cavity();
  s2.ring_z0_mm = s2.height_mm; // ring above the ceiling
  CHECK_THROWS_AS(s2.validate(), ConfigError);
  CavitySpec s3 = ring_cavity();
  s3.ring_eps = 0.5;
  CHECK_THROWS_AS(s3.validate(), ConfigError);
}

TEST_CASE("cell-averaged permittivity matches exact rectangle overlap") {
  CavitySpec s = ring_cavity();
  double dr = 0.25, dz = 0.25;
  // Deep inside the ring and far outside match the point sample.
  double rm = 0.5 * (s.ring_inner_r_mm + s.ring_outer_r_mm);
  double zm = s.ring_z0_mm + 0.5 * s.ring_height_mm;
  CHECK(s.eps_cell(rm, zm, dr, dz) == Approx(s.ring_eps).margin(1e-12));
  CHECK(s.eps_cell(s.radius_mm - 1.0, zm, dr, dz) == Approx(1.0).margin(1e-12));
  // A cell centred on the outer ring wall averages half ring, half vacuum.
  double expect = 1.0 + 0.5 * (s.ring_eps - 1.0);
  CHECK(s.eps_cell(s.ring_outer_r_mm, zm, dr, dz) == Approx(expect).margin(1e-12));
  // Quarter overlap at the ring's outer top corner.
  double corner = 1.0 + 0.25 * (s.ring_eps - 1.0);
  CHECK(s.eps_cell(s.ring_outer_r_mm, s.ring_z0_mm + s.ring_height_mm, dr, dz) ==
        Approx(corner).margin(1e-12));
}
