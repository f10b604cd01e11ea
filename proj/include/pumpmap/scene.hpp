// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pumpmap/common.hpp"
#include "pumpmap/config.hpp"

namespace pumpmap {

struct Material {
  std::string name;
  double refractive_index = 1.0;
  double absorption_mm = 0.0; // 1/mm, >= 0

  void validate() const {
    if (refractive_index < 1.0) throw ConfigError("material " + name + ": refractive index < 1");
    if (absorption_mm < 0.0) throw ConfigError("material " + name + ": absorption < 0");
  }
};

// Oriented half-space constraint n.p <= c (n unit length).
struct HalfSpace {
  Vec3 n;
  double c = 0.0;
};

enum class TipStyle { Flat, Wedge, Spear };

inline const char* tip_style_name(TipStyle t) {
  switch (t) {
    case TipStyle::Flat: return "flat";
    case TipStyle::Wedge: return "wedge";
    case TipStyle::Spear: return "spear";
  }
  return "?";
}

inline TipStyle tip_style_from_name(const std::string& s) {
  if (s == "flat") return TipStyle::Flat;
  if (s == "wedge") return TipStyle::Wedge;
  if (s == "spear") return TipStyle::Spear;
  throw ConfigError("unknown tip style: " + s + " (expected flat|wedge|spear)");
}

// Convex solid: a finite cylinder or an axis-aligned box, optionally clipped
// by planar half-spaces. Exact normals everywhere; no tessellation.
struct Solid {
  enum class Kind { Cylinder, Box };

  Kind kind = Kind::Cylinder;
  // Cylinder: points p with |(p-base) - ((p-base).axis) axis| <= radius and
  // 0 <= (p-base).axis <= length.
  Vec3 base;
  Vec3 axis{0, 0, 1}; // unit
  double radius = 0.0;
  double length = 0.0;
  // Box: lo <= p <= hi componentwise.
  Vec3 lo, hi;

  std::vector<HalfSpace> clips;
  Material material;
  Region region = Region::Air;

  bool contains(const Vec3& p) const {
    if (kind == Kind::Cylinder) {
      Vec3 m = p - base;
      double h = m.dot(axis);
      if (h < 0.0 || h > length) return false;
      if ((m - h * axis).norm2() > radius * radius) return false;
    } else {
      if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y || p.z < lo.z || p.z > hi.z)
        return false;
    }
    for (const auto& hs : clips)
      if (hs.n.dot(p) > hs.c) return false;
    return true;
  }

  struct Interval {
    double t0 = 0.0, t1 = 0.0;
    Vec3 n0, n1; // outward surface normals at entry/exit
    bool hit = false;
  };

  // Ray/solid interval with entry and exit normals. Convexity makes this a
  // single interval (possibly empty).
  Interval clip_ray(const Vec3& o, const Vec3& d) const {
    double t0 = -1e300, t1 = 1e300;
    Vec3 n0, n1;
    auto narrow = [&](double a, double b, const Vec3& na, const Vec3& nb) {
      if (a > t0) {
        t0 = a;
        n0 = na;
      }
      if (b < t1) {
        t1 = b;
        n1 = nb;
      }
    };

    if (kind == Kind::Cylinder) {
      Vec3 m = o - base;
      double md = m.dot(axis);
      double dd = d.dot(axis);
      // Caps as a slab along the axis.
      if (std::abs(dd) < 1e-15) {
        if (md < 0.0 || md > length) return {};
      } else {
        double a = (0.0 - md) / dd;
        double b = (length - md) / dd;
        Vec3 na = -axis, nb = axis;
        if (a > b) {
          std::swap(a, b);
          std::swap(na, nb);
        }
        narrow(a, b, na, nb);
      }
      // Side wall quadratic in the plane perpendicular to the axis.
      Vec3 mp = m - md * axis;
      Vec3 dpv = d - dd * axis;
      double A = dpv.norm2();
      double C = mp.norm2() - radius * radius;
      if (A < 1e-14) {
        if (C > 0.0) return {};
      } else {
        double B = mp.dot(dpv);
        double disc = B * B - A * C;
        if (disc < 0.0) return {};
        double sq = std::sqrt(disc);
        double a = (-B - sq) / A;
        double b = (-B + sq) / A;
        auto side_normal = [&](double t) {
          Vec3 p = o + t * d - base;
          Vec3 rad = p - p.dot(axis) * axis;
          double rn = rad.norm();
          return rn > 0.0 ? rad / rn : Vec3{1, 0, 0};
        };
        narrow(a, b, side_normal(a), side_normal(b));
      }
    } else {
      const double olo[3] = {lo.x, lo.y, lo.z};
      const double ohi[3] = {hi.x, hi.y, hi.z};
      const double oo[3] = {o.x, o.y, o.z};
      const double dv[3] = {d.x, d.y, d.z};
      for (int i = 0; i < 3; ++i) {
        Vec3 n{};
        (&n.x)[i] = 1.0;
        if (std::abs(dv[i]) < 1e-15) {
          if (oo[i] < olo[i] || oo[i] > ohi[i]) return {};
        } else {
          double a = (olo[i] - oo[i]) / dv[i];
          double b = (ohi[i] - oo[i]) / dv[i];
          Vec3 na = -n, nb = n;
          if (a > b) {
            std::swap(a, b);
            std::swap(na, nb);
          }
          narrow(a, b, na, nb);
        }
      }
    }

    for (const auto& hs : clips) {
      double dn = d.dot(hs.n);
      double on = o.dot(hs.n);
      if (std::abs(dn) < 1e-15) {
        if (on > hs.c) return {};
      } else if (dn > 0.0) {
        double b = (hs.c - on) / dn;
        if (b < t1) {
          t1 = b;
          n1 = hs.n;
        }
      } else {
        double a = (hs.c - on) / dn;
        if (a > t0) {
          t0 = a;
          n0 = hs.n;
        }
      }
    }

    if (t0 >= t1) return {};
    return {t0, t1, n0, n1, true};
  }
};

struct Hit {
  double distance = 0.0;
  Vec3 point;
  Vec3 normal; // unit, oriented against the incoming ray
  Material material_before;
  Material material_after;
  Region region_before = Region::Air;
  Region region_after = Region::Air;
};

// Absorbing/reflecting plane at the pump LED; rays crossing it are either
// tallied as retro-reflected or diffusely recycled. Kept outside the solid
// list: it is a tracer boundary condition, not a refracting body.
struct SourcePlane {
  double z = 0.0;
  double radius = 0.0;      // active disc; outside it the plane is absent
  double reflectance = 0.0; // 0 = perfect absorber
  bool specular = false;    // default diffuse (Lambertian) re-emission
};

struct SceneConfig {
  TipStyle tip_style = TipStyle::Wedge;
  double tip_full_angle_deg = 40.0;
  double rod_diameter_mm = 5.0;
  double rod_length_mm = 130.0;
  double coupling_thickness_mm = 0.05;
  bool with_crystal = true;
  double crystal_diameter_mm = 8.0;
  double crystal_length_mm = 8.0;
  double insertion_depth_mm = 7.0; // apex depth below the crystal top of the entry face
  bool with_detector = false;
  bool detector_bucket = false;  // integrating capture around the tip
  double detector_diameter_mm = 12.0;
  double detector_gap_mm = 0.5;
  double detector_thickness_mm = 0.5;
  double detector_depth_mm = 9.0; // bucket reach below the apex

  double quartz_n = 1.46;
  double crystal_n = 1.65;
  double crystal_alpha_mm = 2.0;
  double coupling_n = 1.46; // index-matched to the rod by default
  double source_plane_reflectance = 0.9;
  bool source_plane_specular = false;

  // Scene z of the cavity frame origin (cavity floor); grids are written in
  // the cavity frame so field maps overlay without further bookkeeping.
  double cavity_base_z_mm = 0.0;

  static SceneConfig from_config(const Config& c) {
    SceneConfig s;
    s.tip_style = tip_style_from_name(c.get_string("scene.tip_style", "wedge"));
    s.tip_full_angle_deg = c.get_double("scene.tip_full_angle_deg", s.tip_full_angle_deg);
    s.rod_diameter_mm = c.get_double("scene.rod_diameter_mm", s.rod_diameter_mm);
    s.rod_length_mm = c.get_double("scene.rod_length_mm", s.rod_length_mm);
    s.coupling_thickness_mm = c.get_double("scene.coupling_thickness_mm", s.coupling_thickness_mm);
    s.with_crystal = c.get_bool("scene.with_crystal", s.with_crystal);
    s.crystal_diameter_mm = c.get_double("scene.crystal_diameter_mm", s.crystal_diameter_mm);
    s.crystal_length_mm = c.get_double("scene.crystal_length_mm", s.crystal_length_mm);
    s.insertion_depth_mm = c.get_double("scene.insertion_depth_mm", s.insertion_depth_mm);
    s.with_detector = c.get_bool("scene.with_detector", s.with_detector);
    s.detector_bucket =
        c.get_string("scene.detector_style", s.detector_bucket ? "bucket" : "disc") == "bucket";
    s.detector_diameter_mm = c.get_double("scene.detector_diameter_mm", s.detector_diameter_mm);
    s.detector_gap_mm = c.get_double("scene.detector_gap_mm", s.detector_gap_mm);
    s.detector_thickness_mm = c.get_double("scene.detector_thickness_mm", s.detector_thickness_mm);
    s.detector_depth_mm = c.get_double("scene.detector_depth_mm", s.detector_depth_mm);
    s.quartz_n = c.get_double("materials.quartz_n", s.quartz_n);
    s.crystal_n = c.get_double("materials.crystal_n", s.crystal_n);
    s.crystal_alpha_mm = c.get_double("materials.crystal_alpha_mm", s.crystal_alpha_mm);
    s.coupling_n = c.get_double("materials.coupling_n", s.quartz_n);
    s.source_plane_reflectance =
        c.get_double("source.plane_reflectance", s.source_plane_reflectance);
    s.source_plane_specular = c.get_bool("source.plane_specular", s.source_plane_specular);
    s.cavity_base_z_mm = c.get_double("scene.cavity_base_z_mm", s.cavity_base_z_mm);
    return s;
  }
};

class Scene {
 public:
  std::vector<Solid> solids; // later entries carve earlier ones
  Vec3 bbox_lo, bbox_hi;
  SourcePlane source_plane;
  TipStyle tip_style = TipStyle::Flat;
  double tip_full_angle_deg = 0.0;
  Vec3 tip_apex;
  std::vector<HalfSpace> tip_facets;
  double cavity_base_z_mm = 0.0;

  static const Material& air() {
    static const Material m{"air", 1.0, 0.0};
    return m;
  }

  Region region_at(const Vec3& p) const {
    for (auto it = solids.rbegin(); it != solids.rend(); ++it)
      if (it->contains(p)) return it->region;
    return Region::Air;
  }

  const Material& material_at(const Vec3& p) const {
    for (auto it = solids.rbegin(); it != solids.rend(); ++it)
      if (it->contains(p)) return it->material;
    return air();
  }

  // Nearest boundary crossing where the effective medium actually changes.
  // Returns nothing when the ray leaves the bounding box through air.
  std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir,
                               double t_min = 1e-9) const {
    if (std::abs(dir.norm2() - 1.0) > 1e-9)
      throw NumericError("degenerate-ray: direction not unit length");

    double t_exit = bbox_exit(origin, dir);

    struct Cand {
      double t;
      Vec3 n;
      int solid;
    };
    std::array<Cand, 64> cands;
    size_t nc = 0;
    for (size_t s = 0; s < solids.size(); ++s) {
      auto iv = solids[s].clip_ray(origin, dir);
      if (!iv.hit) continue;
      if (iv.t0 > t_min && iv.t0 <= t_exit + 1e-9 && nc < cands.size())
        cands[nc++] = {iv.t0, iv.n0, static_cast<int>(s)};
      if (iv.t1 > t_min && iv.t1 <= t_exit + 1e-9 && nc < cands.size())
        cands[nc++] = {iv.t1, iv.n1, static_cast<int>(s)};
    }
    std::sort(cands.begin(), cands.begin() + nc,
              [](const Cand& a, const Cand& b) { return a.t < b.t; });

    const double probe = 1e-7; // membership probe offset, mm
    size_t i = 0;
    while (i < nc) {
      // Merge candidates that coincide (shared faces of stacked solids).
      size_t j = i + 1;
      while (j < nc && cands[j].t - cands[i].t < 1e-9) ++j;
      double t = cands[i].t;
      Vec3 pa = origin + (t - probe) * dir;
      Vec3 pb = origin + (t + probe) * dir;
      const Material& ma = material_at(pa);
      const Material& mb = material_at(pb);
      Region ra = region_at(pa);
      Region rb = region_at(pb);
      if (ra != rb || ma.refractive_index != mb.refractive_index ||
          ma.absorption_mm != mb.absorption_mm) {
        Hit h;
        h.distance = t;
        h.point = origin + t * dir;
        // Among coincident candidates prefer the highest-precedence solid's
        // face; for parallel shared faces any choice gives the same plane.
        const Cand* best = &cands[i];
        for (size_t k = i + 1; k < j; ++k)
          if (cands[k].solid > best->solid) best = &cands[k];
        h.normal = best->n;
        if (h.normal.dot(dir) > 0.0) h.normal = -h.normal;
        double nn = h.normal.norm();
        if (nn < 0.5) {
          // Degenerate (edge/apex) contact: perturb forward and retry,
          // keeping distances relative to the original origin.
          auto sub = intersect(origin + (t + 1e-9) * dir, dir, 1e-9);
          if (!sub) return std::nullopt;
          sub->distance += t + 1e-9;
          sub->point = origin + sub->distance * dir;
          return sub;
        }
        h.normal = h.normal / nn;
        h.material_before = ma;
        h.material_after = mb;
        h.region_before = ra;
        h.region_after = rb;
        return h;
      }
      i = j;
    }
    return std::nullopt;
  }

  double bbox_exit(const Vec3& o, const Vec3& d) const {
    double t = 1e300;
    auto upd = [&](double lo, double hi, double oo, double dd) {
      if (std::abs(dd) < 1e-15) return;
      double a = (lo - oo) / dd, b = (hi - oo) / dd;
      t = std::min(t, std::max(a, b));
    };
    upd(bbox_lo.x, bbox_hi.x, o.x, d.x);
    upd(bbox_lo.y, bbox_hi.y, o.y, d.y);
    upd(bbox_lo.z, bbox_hi.z, o.z, d.z);
    return t;
  }

  const Solid* find_region(Region r) const {
    for (const auto& s : solids)
      if (s.region == r) return &s;
    return nullptr;
  }

  // Debug tessellation of all solids (Wavefront OBJ). Facet/shank boundary
  // curves come out exactly on the clip planes.
  void export_obj(const std::string& path, int n_theta = 96) const;
};

inline Scene build_scene(const SceneConfig& cfg) {
  if (cfg.rod_diameter_mm <= 0 || cfg.rod_length_mm <= 0 || cfg.coupling_thickness_mm <= 0)
    throw ConfigError("invalid-config: non-positive rod/coupling dimension");
  if (cfg.tip_style != TipStyle::Flat &&
      (cfg.tip_full_angle_deg <= 0.0 || cfg.tip_full_angle_deg >= 180.0))
    throw ConfigError("invalid-config: tip angle outside (0, 180) degrees");
  if (cfg.with_crystal && (cfg.crystal_diameter_mm <= 0 || cfg.crystal_length_mm <= 0))
    throw ConfigError("invalid-config: non-positive crystal dimension");

  Scene sc;
  sc.tip_style = cfg.tip_style;
  sc.tip_full_angle_deg = cfg.tip_full_angle_deg;
  sc.cavity_base_z_mm = cfg.cavity_base_z_mm;

  Material quartz{"fused-quartz", cfg.quartz_n, 0.0};
  Material coupling{"coupling-fluid", cfg.coupling_n, 0.0};
  Material crystal{"ptc-ptp", cfg.crystal_n, cfg.crystal_alpha_mm};
  Material absorber{"detector", 1.0, 0.0};
  quartz.validate();
  coupling.validate();
  crystal.validate();

  const double rod_r = 0.5 * cfg.rod_diameter_mm;
  const double z_rod0 = cfg.coupling_thickness_mm;
  const double z_apex = z_rod0 + cfg.rod_length_mm;

  // Coupling fluid fills the LED/rod gap across the rod footprint.
  Solid coup;
  coup.kind = Solid::Kind::Cylinder;
  coup.base = {0, 0, 0};
  coup.radius = rod_r;
  coup.length = cfg.coupling_thickness_mm;
  coup.material = coupling;
  coup.region = Region::Coupling;
  sc.solids.push_back(coup);

  // Tip facet planes, all through the apex on the rod axis.
  std::vector<HalfSpace> facets;
  if (cfg.tip_style != TipStyle::Flat) {
    double beta = 0.5 * cfg.tip_full_angle_deg * kPi / 180.0;
    int nf = cfg.tip_style == TipStyle::Wedge ? 2 : 3;
    double phi0 = cfg.tip_style == TipStyle::Wedge ? 0.0 : kPi / 2.0;
    for (int k = 0; k < nf; ++k) {
      double phi = phi0 + 2.0 * kPi * k / nf;
      Vec3 n{std::cos(beta) * std::cos(phi), std::cos(beta) * std::sin(phi), std::sin(beta)};
      facets.push_back({n, n.dot({0, 0, z_apex})});
    }
  }
  sc.tip_apex = {0, 0, z_apex};
  sc.tip_facets = facets;

  double tip_len = 0.0;
  if (!facets.empty()) {
    double beta = 0.5 * cfg.tip_full_angle_deg * kPi / 180.0;
    tip_len = rod_r / std::tan(beta);
  }

  double crystal_z0 = 0.0;
  if (cfg.with_crystal) {
    if (cfg.tip_style == TipStyle::Flat) {
      crystal_z0 = z_apex; // butt coupling: crystal sits on the flat end
    } else {
      if (cfg.insertion_depth_mm <= 0 || cfg.insertion_depth_mm >= cfg.crystal_length_mm)
        throw ConfigError("invalid-config: insertion depth must lie inside the crystal");
      if (tip_len > cfg.insertion_depth_mm)
        throw ConfigError("invalid-config: tip facets extend below the crystal entry face "
                          "(tip length " + std::to_string(tip_len) + " mm > insertion depth)");
      crystal_z0 = z_apex - cfg.insertion_depth_mm;
    }
    Solid cry;
    cry.kind = Solid::Kind::Cylinder;
    cry.base = {0, 0, crystal_z0};
    cry.radius = 0.5 * cfg.crystal_diameter_mm;
    cry.length = cfg.crystal_length_mm;
    cry.material = crystal;
    cry.region = Region::Crystal;
    sc.solids.push_back(cry);
    if (cfg.tip_style != TipStyle::Flat && cry.radius <= rod_r)
      throw ConfigError("invalid-config: crystal must be wider than the embedded rod");
  }

  // Rod after the crystal so the embedded tip carves it by precedence.
  Solid rod;
  rod.kind = Solid::Kind::Cylinder;
  rod.base = {0, 0, z_rod0};
  rod.radius = rod_r;
  rod.length = cfg.rod_length_mm;
  rod.clips = facets;
  rod.material = quartz;
  rod.region = Region::Waveguide;
  sc.solids.push_back(rod);

  if (cfg.with_detector) {
    if (cfg.detector_diameter_mm <= 0 || cfg.detector_thickness_mm <= 0)
      throw ConfigError("invalid-config: non-positive detector dimension");
    if (!cfg.detector_bucket) {
      // Flat meter head facing the rod output across an air gap.
      Solid det;
      det.kind = Solid::Kind::Cylinder;
      det.base = {0, 0, z_apex + cfg.detector_gap_mm};
      det.radius = 0.5 * cfg.detector_diameter_mm;
      det.length = cfg.detector_thickness_mm;
      det.material = absorber;
      det.region = Region::Detector;
      sc.solids.push_back(det);
    } else {
      // Integrating capture: an absorbing block surrounds the tip, kept off
      // the rod surface by an air sleeve of detector_gap_mm so the quartz/air
      // optics at the output stay those of a real measurement. Light that
      // retreats below the bucket floor (back down the guide) is the part a
      // power meter never sees. The sleeve and rod are pushed in front,
      // front-of-list solids are carved by later ones.
      Solid det;
      det.kind = Solid::Kind::Cylinder;
      det.base = {0, 0, z_apex - cfg.detector_depth_mm};
      det.radius = 0.5 * cfg.detector_diameter_mm;
      det.length = cfg.detector_depth_mm + cfg.detector_thickness_mm;
      det.material = absorber;
      det.region = Region::Detector;

      Solid sleeve;
      sleeve.kind = Solid::Kind::Cylinder;
      sleeve.base = {0, 0, z_apex - cfg.detector_depth_mm};
      sleeve.radius = rod_r + cfg.detector_gap_mm;
      sleeve.length = cfg.detector_depth_mm + cfg.detector_gap_mm;
      sleeve.material = Material{"air", 1.0, 0.0};
      sleeve.region = Region::Air;

      sc.solids.insert(sc.solids.begin(), {det, sleeve});
    }
  }

  int n_detectors = 0;
  for (const auto& s : sc.solids) n_detectors += s.region == Region::Detector ? 1 : 0;
  if (n_detectors > 1) throw ConfigError("invalid-config: more than one detector");

  sc.source_plane = {0.0, rod_r, cfg.source_plane_reflectance, cfg.source_plane_specular};

  // Bounding box with margin; anything leaving it is tagged escaped.
  double r_max = rod_r;
  double z_max = z_apex;
  for (const auto& s : sc.solids) {
    r_max = std::max(r_max, s.radius);
    z_max = std::max(z_max, s.base.z + s.length);
  }
  const double margin = 1.0;
  sc.bbox_lo = {-r_max - margin, -r_max - margin, -margin};
  sc.bbox_hi = {r_max + margin, r_max + margin, z_max + margin};
  return sc;
}

inline void Scene::export_obj(const std::string& path, int n_theta) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path);
  out.precision(12);
  int voff = 1;
  auto vtx = [&](const Vec3& p) {
    out << "v " << p.x << " " << p.y << " " << p.z << "\n";
    return voff++;
  };

  for (const auto& s : solids) {
    out << "o " << region_name(s.region) << "\n";
    if (s.kind == Solid::Kind::Box) {
      int a = vtx({s.lo.x, s.lo.y, s.lo.z}), b = vtx({s.hi.x, s.lo.y, s.lo.z});
      int c = vtx({s.hi.x, s.hi.y, s.lo.z}), d = vtx({s.lo.x, s.hi.y, s.lo.z});
      int e = vtx({s.lo.x, s.lo.y, s.hi.z}), f = vtx({s.hi.x, s.lo.y, s.hi.z});
      int g = vtx({s.hi.x, s.hi.y, s.hi.z}), h = vtx({s.lo.x, s.hi.y, s.hi.z});
      for (auto q : {std::array{a, b, c, d}, std::array{e, h, g, f}, std::array{a, e, f, b},
                     std::array{b, f, g, c}, std::array{c, g, h, d}, std::array{d, h, e, a}})
        out << "f " << q[0] << " " << q[1] << " " << q[2] << " " << q[3] << "\n";
      continue;
    }

    // Cylinder wall; the top edge per azimuth follows the nearest clip plane,
    // producing the elliptical facet/shank boundary for tipped rods.
    std::vector<int> bot(n_theta), top(n_theta);
    std::vector<Vec3> top_pts(n_theta);
    for (int k = 0; k < n_theta; ++k) {
      double th = 2.0 * kPi * k / n_theta;
      Vec3 w{s.radius * std::cos(th), s.radius * std::sin(th), 0.0};
      Vec3 pb = s.base + w;
      double h_top = s.length;
      for (const auto& hs : s.clips) {
        double dn = hs.n.dot(s.axis);
        if (dn > 1e-12) {
          double allowed = (hs.c - hs.n.dot(pb)) / dn;
          h_top = std::min(h_top, std::max(0.0, allowed));
        }
      }
      Vec3 pt = pb + h_top * s.axis;
      bot[k] = vtx(pb);
      top[k] = vtx(pt);
      top_pts[k] = pt;
    }
    for (int k = 0; k < n_theta; ++k) {
      int k2 = (k + 1) % n_theta;
      out << "f " << bot[k] << " " << bot[k2] << " " << top[k2] << " " << top[k] << "\n";
    }
    // Bottom cap fan.
    int c0 = vtx(s.base);
    for (int k = 0; k < n_theta; ++k)
      out << "f " << c0 << " " << bot[(k + 1) % n_theta] << " " << bot[k] << "\n";
    if (s.clips.empty()) {
      int c1 = vtx(s.base + s.length * s.axis);
      for (int k = 0; k < n_theta; ++k)
        out << "f " << c1 << " " << top[k] << " " << top[(k + 1) % n_theta] << "\n";
    } else {
      // Facet fans from the apex to the boundary curve.
      Vec3 apex = s.base + s.length * s.axis;
      int ca = vtx(apex);
      for (int k = 0; k < n_theta; ++k)
        out << "f " << ca << " " << top[k] << " " << top[(k + 1) % n_theta] << "\n";
    }
  }
}

} // namespace pumpmap
