// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pumpmap/config.hpp"
#include "pumpmap/rng.hpp"
#include "pumpmap/source.hpp"
#include "pumpmap/spectrum.hpp"
#include "test_util.hpp"

using namespace pumpmap;
using namespace pumpmap::testutil;
using Catch::Approx;

namespace {

Spectrum flat_absorption(double alpha, double lo = 500, double hi = 650) {
  Spectrum a;
  a.kind = Spectrum::Kind::Absorption;
  a.samples = {{lo, alpha}, {hi, alpha}};
  return a;
}

} // namespace

TEST_CASE("bare-die emission is Lambertian") {
  LedSource src;
  src.power_w = 1.0;
  RngStream rng(11, 0);
  const int n = 200000;
  double sum_cos = 0.0, sum_x = 0.0, sum_y = 0.0;
  int below_60 = 0;
  for (int i = 0; i < n; ++i) {
    Ray r = src.sample_ray(rng, n);
    CHECK(r.direction.norm() == Approx(1.0).margin(1e-12));
    REQUIRE(r.direction.z > 0.0);
    sum_cos += r.direction.z;
    sum_x += r.direction.x;
    sum_y += r.direction.y;
    if (r.direction.z > 0.5) ++below_60;
  }
  // cos(theta) has mean 2/3, variance 1/18; cos^2 is uniform so
  // P(theta < 60 deg) = sin^2(60 deg) = 3/4.
  double sig_cos = std::sqrt(1.0 / 18.0 / n);
  CHECK(std::abs(sum_cos / n - 2.0 / 3.0) < 3 * sig_cos);
  double sig_frac = std::sqrt(0.75 * 0.25 / n);
  CHECK(std::abs(below_60 / double(n) - 0.75) < 3 * sig_frac);
  // Azimuthal symmetry: E[dir_x] = E[dir_y] = 0, Var = E[sin^2]/2 = 1/4.
  CHECK(std::abs(sum_x / n) < 3 * std::sqrt(0.25 / n));
  CHECK(std::abs(sum_y / n) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("numerical aperture truncates the launch cone") {
  LedSource src;
  src.na = 0.95;
  src.launch_n = 1.46;
  double s2_max = (src.na / src.launch_n) * (src.na / src.launch_n);
  double z_min = std::sqrt(1.0 - s2_max);
  RngStream rng(12, 0);
  const int n = 200000;
  double sum_s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Ray r = src.sample_ray(rng, n);
    REQUIRE(r.direction.z >= z_min - 1e-12);
    sum_s2 += 1.0 - r.direction.z * r.direction.z;
  }
  // sin^2(theta) is uniform on [0, s2_max].
  double sig = s2_max / std::sqrt(12.0 * n);
  CHECK(std::abs(sum_s2 / n - 0.5 * s2_max) < 3 * sig);
}

TEST_CASE("ray origins tile the die and carry equal power shares") {
  LedSource src;
  src.face_center = {0.4, -0.2, 0.0};
  src.die_x_mm = 3.2;
  src.die_y_mm = 2.6;
  src.power_w = 2.5;
  RngStream rng(13, 0);
  const uint64_t n = 5000;
  double sum_w = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    Ray r = src.sample_ray(rng, n);
    CHECK(std::abs(r.origin.x - 0.4) <= 1.6 + 1e-12);
    CHECK(std::abs(r.origin.y + 0.2) <= 1.3 + 1e-12);
    CHECK(r.origin.z == 0.0);
    CHECK(r.weight == src.power_w / double(n));
    sum_w += r.weight;
  }
  CHECK(sum_w == Approx(src.power_w).margin(1e-12));
}

TEST_CASE("identical seeds reproduce the ray sequence bitwise") {
  LedSource src;
  src.na = 0.95;
  src.launch_n = 1.46;
  RngStream a(99, 4), b(99, 4);
  for (int i = 0; i < 1000; ++i) {
    Ray ra = src.sample_ray(a, 1000);
    Ray rb = src.sample_ray(b, 1000);
    CHECK(ra.origin.x == rb.origin.x);
    CHECK(ra.direction.x == rb.direction.x);
    CHECK(ra.direction.z == rb.direction.z);
  }
}

TEST_CASE("source config validation") {
  Config c;
  c.set("source.die_x_mm", "-1");
  CHECK_THROWS_AS(LedSource::from_config(c, nullptr), ConfigError);
  Config c2;
  c2.set("source.na", "1.5");
  CHECK_THROWS_AS(LedSource::from_config(c2, nullptr), ConfigError);
  Config c3;
  c3.set("source.power_w", "0");
  CHECK_THROWS_AS(LedSource::from_config(c3, nullptr), ConfigError);
}

TEST_CASE("emission sampler reproduces the tabulated density") {
  Spectrum em = Spectrum::load_csv(repo_path("data/led_emission.csv"), Spectrum::Kind::Emission);
  SpectrumSampler sampler(em);
  RngStream rng(21, 0);
  const int n = 100000;
  double sum = 0.0;
  int below_peak = 0;
  for (int i = 0; i < n; ++i) {
    double wl = sampler.sample(rng);
    REQUIRE(wl >= em.lambda_min());
    REQUIRE(wl <= em.lambda_max());
    sum += wl;
    if (wl < 570.0) ++below_peak;
  }
  // Symmetric triangle about 570 nm, half-width 15 nm: mean 570, var a^2/6.
  double sig_mean = std::sqrt(15.0 * 15.0 / 6.0 / n);
  CHECK(std::abs(sum / n - 570.0) < 3 * sig_mean);
  CHECK(std::abs(below_peak / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("effective absorption: flat coefficient is recovered exactly") {
  Spectrum em = Spectrum::load_csv(repo_path("data/led_emission.csv"), Spectrum::Kind::Emission);
  Spectrum ab = flat_absorption(3.7);
  CHECK(effective_absorption(em, ab) == Approx(3.7).margin(1e-12));
}

TEST_CASE("effective absorption of the bundled spectra") {
  Spectrum em = Spectrum::load_csv(repo_path("data/led_emission.csv"), Spectrum::Kind::Emission);
  Spectrum ab =
      Spectrum::load_csv(repo_path("data/ptcptp_absorption.csv"), Spectrum::Kind::Absorption);
  // Symmetric emission times an affine coefficient: the odd part integrates
  // to zero, leaving the value at the peak.
  CHECK(effective_absorption(em, ab) == Approx(2.0).margin(1e-9));
}

TEST_CASE("effective absorption rejects domain mismatch") {
  Spectrum em = Spectrum::load_csv(repo_path("data/led_emission.csv"), Spectrum::Kind::Emission);
  Spectrum ab = flat_absorption(1.0, 560.0, 600.0); // starts inside the emission band
  CHECK_THROWS_AS(effective_absorption(em, ab), NumericError);
}

TEST_CASE("spectrum csv loader rejects malformed input") {
  CHECK_THROWS_AS(Spectrum::load_csv("/nonexistent/file.csv", Spectrum::Kind::Emission), IoError);
  std::string bad = "/tmp/pumpmap_bad_spectrum.csv";
  {
    std::ofstream out(bad);
    out << "lambda,value\n570,1\n";
  }
  CHECK_THROWS_AS(Spectrum::load_csv(bad, Spectrum::Kind::Emission), IoError);
  {
    std::ofstream out(bad);
    out << "wavelength_nm,value\n570,1\n560,1\n";
  }
  CHECK_THROWS_AS(Spectrum::load_csv(bad, Spectrum::Kind::Emission), ConfigError);
  std::remove(bad.c_str());
}
