// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pumpmap/config.hpp"
#include "pumpmap/rng.hpp"
#include "pumpmap/scene.hpp"
#include "test_util.hpp"

using namespace pumpmap;
using namespace pumpmap::testutil;
using Catch::Approx;

namespace {

SceneConfig invasive_cfg() {
  return SceneConfig::from_config(Config::from_file(repo_path("configs/invasive.cfg")));
}

SceneConfig butt_cfg() {
  return SceneConfig::from_config(Config::from_file(repo_path("configs/butt.cfg")));
}

} // namespace

TEST_CASE("build_scene rejects invalid configurations") {
  SceneConfig c = invasive_cfg();
  SECTION("non-positive dimension") {
    c.rod_diameter_mm = 0.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
  }
  SECTION("tip angle outside (0, 180)") {
    c.tip_full_angle_deg = 0.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
    c.tip_full_angle_deg = 180.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
  }
  SECTION("tip longer than the insertion depth") {
    // 40 deg full angle on a 2.5 mm radius needs 6.87 mm; 5 mm is too shallow.
    c.insertion_depth_mm = 5.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
  }
  SECTION("insertion must stay inside the crystal") {
    c.insertion_depth_mm = 8.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
  }
  SECTION("crystal must be wider than the embedded rod") {
    c.crystal_diameter_mm = 5.0;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
  }
}

TEST_CASE("tip facets pass through the apex at the configured angle") {
  SceneConfig c = invasive_cfg();
  double beta = 0.5 * c.tip_full_angle_deg * kPi / 180.0;

  SECTION("wedge: two facets, normals subtend pi - 2 beta") {
    Scene sc = build_scene(c);
    REQUIRE(sc.tip_facets.size() == 2);
    CHECK(sc.tip_facets[0].n.dot(sc.tip_facets[1].n) == Approx(-std::cos(2 * beta)).margin(1e-12));
    for (const auto& f : sc.tip_facets) {
      CHECK(f.n.norm() == Approx(1.0).margin(1e-12));
      CHECK(f.n.dot(sc.tip_apex) == Approx(f.c).margin(1e-9));
    }
  }
  SECTION("spear: three facets at equal mutual angles") {
    c.tip_style = TipStyle::Spear;
    Scene sc = build_scene(c);
    REQUIRE(sc.tip_facets.size() == 3);
    double d01 = sc.tip_facets[0].n.dot(sc.tip_facets[1].n);
    double d12 = sc.tip_facets[1].n.dot(sc.tip_facets[2].n);
    double d20 = sc.tip_facets[2].n.dot(sc.tip_facets[0].n);
    CHECK(d01 == Approx(d12).margin(1e-12));
    CHECK(d12 == Approx(d20).margin(1e-12));
    for (const auto& f : sc.tip_facets)
      CHECK(f.n.dot(sc.tip_apex) == Approx(f.c).margin(1e-9));
  }
}

TEST_CASE("axial ray crosses the butt stack in order") {
  Scene sc = build_scene(butt_cfg());
  Vec3 o{0, 0, -0.5}, d{0, 0, 1};

  auto h1 = sc.intersect(o, d);
  REQUIRE(h1.has_value());
  CHECK(h1->distance == Approx(0.5).margin(1e-9));
  CHECK(h1->region_after == Region::Coupling);

  auto h2 = sc.intersect(h1->point, d);
  REQUIRE(h2.has_value());
  CHECK(h2->distance == Approx(0.05).margin(1e-9));
  CHECK(h2->material_after.refractive_index == Approx(1.46));
  CHECK(h2->region_after == Region::Waveguide);

  auto h3 = sc.intersect(h2->point, d);
  REQUIRE(h3.has_value());
  CHECK(h3->distance == Approx(130.0).margin(1e-9));
  CHECK(h3->region_after == Region::Crystal);
  CHECK(h3->material_after.refractive_index == Approx(1.65));

  auto h4 = sc.intersect(h3->point, d);
  REQUIRE(h4.has_value());
  CHECK(h4->distance == Approx(8.0).margin(1e-9));
  CHECK(h4->region_after == Region::Air);
  CHECK(h4->normal.dot(d) < 0.0); // normals face the incoming ray
}

TEST_CASE("wall hit reports an inward radial normal") {
  Scene sc = build_scene(butt_cfg());
  Vec3 o{0, 0, 50.0}, d{1, 0, 0};
  auto h = sc.intersect(o, d);
  REQUIRE(h.has_value());
  CHECK(h->distance == Approx(2.5).margin(1e-9));
  CHECK(h->normal.x == Approx(-1.0).margin(1e-9));
  CHECK(std::abs(h->normal.z) < 1e-9);
  CHECK(h->material_before.refractive_index == Approx(1.46));
  CHECK(h->region_after == Region::Air);
}

TEST_CASE("embedded tip carves the crystal: region probes") {
  Scene sc = build_scene(invasive_cfg());
  double z_apex = sc.tip_apex.z;
  // On-axis just below the apex: still quartz.
  CHECK(sc.region_at({0, 0, z_apex - 0.1}) == Region::Waveguide);
  // Same height but outside the facet planes: crystal.
  CHECK(sc.region_at({2.0, 0, z_apex - 0.5}) == Region::Crystal);
  // Above the apex: crystal.
  CHECK(sc.region_at({0, 0, z_apex + 0.2}) == Region::Crystal);
  // Outside everything: air.
  CHECK(sc.region_at({10.0, 0, z_apex}) == Region::Air);
}

TEST_CASE("carved crystal volume matches the analytic wedge subtraction") {
  SceneConfig c = invasive_cfg();
  Scene sc = build_scene(c);
  double R = 0.5 * c.rod_diameter_mm;
  double rc = 0.5 * c.crystal_diameter_mm;
  double beta = 0.5 * c.tip_full_angle_deg * kPi / 180.0;
  // Embedded rod volume: the wedge taper, cross-section {|x| <= tan(b) d}
  // inside the disc, integrates to 2 (R^3/tan b)(pi/2 - 2/3); below the taper
  // the full shaft carves a cylindrical slice down to the crystal entry.
  double tip_len = R / std::tan(beta);
  double v_tip = 2.0 * (R * R * R / std::tan(beta)) * (kPi / 2.0 - 2.0 / 3.0);
  double v_slice = kPi * R * R * (c.insertion_depth_mm - tip_len);
  double v_expect = kPi * rc * rc * c.crystal_length_mm - v_tip - v_slice;

  const Solid* cry = sc.find_region(Region::Crystal);
  REQUIRE(cry != nullptr);
  RngStream rng(2024, 0);
  const int n = 400000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    Vec3 p{rng.uniform(-rc, rc), rng.uniform(-rc, rc),
           cry->base.z + rng.uniform(0.0, c.crystal_length_mm)};
    if (sc.region_at(p) == Region::Crystal) ++hits;
  }
  double v_box = 4.0 * rc * rc * c.crystal_length_mm;
  double v_mc = v_box * hits / double(n);
  double p_hit = v_expect / v_box;
  double sigma = v_box * std::sqrt(p_hit * (1 - p_hit) / n);
  CHECK(std::abs(v_mc - v_expect) < 4.0 * sigma);
}

TEST_CASE("intersect agrees with contains along random chords") {
  Scene sc = build_scene(invasive_cfg());
  RngStream rng(7, 0);
  for (int trial = 0; trial < 500; ++trial) {
    // Random ray through the tip neighbourhood.
    Vec3 o{rng.uniform(-6, 6), rng.uniform(-6, 6), sc.tip_apex.z - 8.0 + rng.uniform(0, 12)};
    double th = rng.uniform(0, kPi), ph = rng.uniform(0, 2 * kPi);
    Vec3 d{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
    Region r0 = sc.region_at(o);
    auto h = sc.intersect(o, d);
    if (!h) continue;
    REQUIRE(h->distance > 0.0);
    CHECK(h->region_before == r0);
    // Immediately past the boundary the probe must agree with the hit tag.
    Vec3 past = h->point + 1e-6 * d;
    CHECK(sc.region_at(past) == h->region_after);
  }
}

TEST_CASE("obj export writes a well-formed mesh") {
  Scene sc = build_scene(invasive_cfg());
  std::string path = "/tmp/pumpmap_scene_test.obj";
  sc.export_obj(path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int nv = 0, nf = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++nv;
    if (line.rfind("f ", 0) == 0) ++nf;
  }
  CHECK(nv > 200);
  CHECK(nf > 200);
  std::remove(path.c_str());
}
