// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "pumpmap/common.hpp"
#include "pumpmap/rng.hpp"
#include "pumpmap/scene.hpp"
#include "pumpmap/source.hpp"
#include "pumpmap/voxelgrid.hpp"

namespace pumpmap {

// Unpolarized Fresnel power reflectance for incidence from n1 into n2.
// cos_i >= 0. Returns 1 beyond the critical angle.
inline double fresnel_reflectance(double n1, double n2, double cos_i) {
  double s2 = (n1 / n2) * (n1 / n2) * (1.0 - cos_i * cos_i);
  if (s2 >= 1.0) return 1.0;
  double cos_t = std::sqrt(1.0 - s2);
  double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
  double rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i);
  return 0.5 * (rs * rs + rp * rp);
}

inline Vec3 reflect_dir(const Vec3& d, const Vec3& n) { return d - 2.0 * d.dot(n) * n; }

// n oriented against d (n.d < 0); caller guarantees no total reflection.
inline Vec3 refract_dir(const Vec3& d, const Vec3& n, double n1, double n2) {
  double eta = n1 / n2;
  double cos_i = -n.dot(d);
  double s2 = eta * eta * (1.0 - cos_i * cos_i);
  double cos_t = std::sqrt(std::max(0.0, 1.0 - s2));
  return (eta * d + (eta * cos_i - cos_t) * n).normalized();
}

struct TraceOptions {
  uint64_t n_rays = 1000000;
  uint64_t seed = 1;
  int workers = 1; // 0 = hardware concurrency
  uint64_t batch_size = 65536;
  int max_bounces = 10000;
  double roulette_rel = 1e-4; // threshold as a fraction of the launch weight
};

struct TraceResult {
  uint64_t rays_traced = 0;
  double launched_w = 0.0;
  double absorbed_w = 0.0;        // bulk absorption, from exact segment attenuation
  double escaped_w = 0.0;         // left the bounding box
  double retro_reflected_w = 0.0; // swallowed by the pump plane
  double detector_w = 0.0;
  double truncated_w = 0.0;       // bounce-limit kills
  double roulette_net_w = 0.0;    // kills minus weight created by survivals
  int max_bounce_depth = 0;

  double terminated_w() const { return truncated_w + roulette_net_w; }

  // Zero up to floating-point roundoff on every run, not just in expectation.
  double conservation_residual() const {
    return launched_w - (absorbed_w + escaped_w + retro_reflected_w + detector_w +
                         truncated_w + roulette_net_w);
  }

  // More than 0.1% of the launched power hit the bounce limit.
  bool bounce_warning() const { return truncated_w > 1e-3 * launched_w; }

  void merge(const TraceResult& o) {
    rays_traced += o.rays_traced;
    launched_w += o.launched_w;
    absorbed_w += o.absorbed_w;
    escaped_w += o.escaped_w;
    retro_reflected_w += o.retro_reflected_w;
    detector_w += o.detector_w;
    truncated_w += o.truncated_w;
    roulette_net_w += o.roulette_net_w;
    max_bounce_depth = std::max(max_bounce_depth, o.max_bounce_depth);
  }
};

// Expected-value deposition along [p0, p1] in a medium with absorption alpha.
// Walks voxel boundaries; per-cell deposits telescope so the grid receives
// exactly w_in * (1 - exp(-alpha L)) when it covers the segment. Returns the
// transmitted weight.
inline double deposit_segment(VoxelGrid* grid, const Vec3& p0, const Vec3& p1, double alpha,
                              double w_in) {
  Vec3 seg = p1 - p0;
  double L = seg.norm();
  if (alpha <= 0.0 || L <= 0.0 || w_in <= 0.0) return w_in;
  double w_out = w_in * std::exp(-alpha * L);
  if (!grid) return w_out;
  Vec3 u = seg / L;

  // Clip [0, L] against the grid box.
  double t0 = 0.0, t1 = L;
  const double glo[3] = {grid->origin.x, grid->origin.y, grid->origin.z};
  const double oo[3] = {p0.x, p0.y, p0.z};
  const double uu[3] = {u.x, u.y, u.z};
  const uint32_t nn[3] = {grid->nx, grid->ny, grid->nz};
  for (int a = 0; a < 3; ++a) {
    double lo = glo[a], hi = glo[a] + nn[a] * grid->pitch;
    if (std::abs(uu[a]) < 1e-15) {
      if (oo[a] < lo || oo[a] > hi) return w_out;
    } else {
      double ta = (lo - oo[a]) / uu[a];
      double tb = (hi - oo[a]) / uu[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
  }
  if (t0 >= t1) return w_out;

  // Voxel walk (Amanatides & Woo) from t0 to t1.
  Vec3 pe = p0 + (t0 + 1e-12) * u;
  uint32_t ci, cj, ck;
  if (!grid->locate(pe, ci, cj, ck)) return w_out;
  int32_t c[3] = {int32_t(ci), int32_t(cj), int32_t(ck)};
  int32_t step[3];
  double t_next[3], dt[3];
  for (int a = 0; a < 3; ++a) {
    if (uu[a] > 1e-15) {
      step[a] = 1;
      t_next[a] = (glo[a] + (c[a] + 1) * grid->pitch - oo[a]) / uu[a];
      dt[a] = grid->pitch / uu[a];
    } else if (uu[a] < -1e-15) {
      step[a] = -1;
      t_next[a] = (glo[a] + c[a] * grid->pitch - oo[a]) / uu[a];
      dt[a] = -grid->pitch / uu[a];
    } else {
      step[a] = 0;
      t_next[a] = 1e300;
      dt[a] = 1e300;
    }
  }

  double t = t0;
  double prev_exp = std::exp(-alpha * t0);
  while (t < t1) {
    int a = 0;
    if (t_next[1] < t_next[a]) a = 1;
    if (t_next[2] < t_next[a]) a = 2;
    double tb = std::min(t_next[a], t1);
    double e = std::exp(-alpha * tb);
    double dep = w_in * (prev_exp - e);
    if (dep > 0.0 && c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < int32_t(nn[0]) &&
        c[1] < int32_t(nn[1]) && c[2] < int32_t(nn[2]))
      grid->value[grid->index(c[0], c[1], c[2])] += dep / grid->voxel_volume();
    prev_exp = e;
    t = tb;
    if (t_next[a] <= t1) {
      c[a] += step[a];
      t_next[a] += dt[a];
    } else {
      break;
    }
  }
  return w_out;
}

namespace detail {

inline void trace_one(const Scene& scene, Ray ray, double w0, const TraceOptions& opt,
                      RngStream& rng, VoxelGrid* grid, TraceResult& res) {
  Vec3 pos = ray.origin;
  Vec3 dir = ray.direction;
  double w = ray.weight;
  const double thr = opt.roulette_rel * w0;
  Material med = scene.material_at(pos + 1e-6 * dir);

  for (int bounce = 0;; ++bounce) {
    if (bounce >= opt.max_bounces) {
      res.truncated_w += w;
      return;
    }
    res.max_bounce_depth = std::max(res.max_bounce_depth, bounce);

    auto hit = scene.intersect(pos, dir);
    double t_event = hit ? hit->distance : scene.bbox_exit(pos, dir);

    // The pump plane intercepts downward rays inside its disc before any
    // solid boundary at the same location.
    const SourcePlane& sp = scene.source_plane;
    bool plane_event = false;
    if (dir.z < -1e-15 && pos.z > sp.z) {
      double t_sp = (sp.z - pos.z) / dir.z;
      if (t_sp > 1e-9 && t_sp <= t_event + 1e-9) {
        Vec3 q = pos + t_sp * dir;
        if (q.x * q.x + q.y * q.y <= sp.radius * sp.radius) {
          plane_event = true;
          t_event = t_sp;
        }
      }
    }

    Vec3 p_event = pos + t_event * dir;
    if (med.absorption_mm > 0.0) {
      double w_after = deposit_segment(grid, pos, p_event, med.absorption_mm, w);
      res.absorbed_w += w - w_after;
      w = w_after;
    }

    if (plane_event) {
      double w_kept = w * sp.reflectance;
      res.retro_reflected_w += w - w_kept; // exact split, conservation telescopes
      w = w_kept;
      if (w <= 0.0) return;
      pos = p_event;
      dir = sp.specular ? Vec3{dir.x, dir.y, -dir.z} : sample_lambertian(rng);
      med = scene.material_at(pos + 1e-6 * dir);
    } else if (!hit) {
      res.escaped_w += w;
      return;
    } else if (hit->region_after == Region::Detector) {
      res.detector_w += w;
      return;
    } else {
      double n1 = hit->material_before.refractive_index;
      double n2 = hit->material_after.refractive_index;
      double cos_i = -hit->normal.dot(dir);
      double R = fresnel_reflectance(n1, n2, cos_i);
      pos = hit->point;
      if (rng.uniform() < R) {
        dir = reflect_dir(dir, hit->normal);
        med = hit->material_before;
      } else {
        dir = refract_dir(dir, hit->normal, n1, n2);
        med = hit->material_after;
      }
    }

    if (w < thr) {
      if (rng.uniform() < 0.5) {
        res.roulette_net_w += w;
        return;
      }
      res.roulette_net_w -= w;
      w *= 2.0;
    }
  }
}

} // namespace detail

// Monte Carlo transport of LED light into the scene. Batches are assigned
// round-robin to workers and each batch owns an independent RNG stream, so a
// fixed (seed, workers) pair reproduces results byte for byte.
inline TraceResult trace(const Scene& scene, const LedSource& source, const TraceOptions& opt,
                         VoxelGrid* grid) {
  if (opt.n_rays == 0) throw ConfigError("invalid-config: ray count must be positive");
  int workers = opt.workers > 0 ? opt.workers
                                : std::max(1u, std::thread::hardware_concurrency());
  uint64_t n_batches = (opt.n_rays + opt.batch_size - 1) / opt.batch_size;
  workers = static_cast<int>(std::min<uint64_t>(workers, n_batches));

  std::vector<TraceResult> results(workers);
  std::vector<VoxelGrid> grids;
  if (grid)
    for (int i = 1; i < workers; ++i) {
      grids.push_back(*grid);
      std::fill(grids.back().value.begin(), grids.back().value.end(), 0.0);
    }

  double w0 = source.power_w / static_cast<double>(opt.n_rays);
  auto run_worker = [&](int wi) {
    TraceResult& res = results[wi];
    VoxelGrid* g = grid ? (wi == 0 ? grid : &grids[wi - 1]) : nullptr;
    for (uint64_t b = wi; b < n_batches; b += workers) {
      RngStream rng(opt.seed, b);
      uint64_t i0 = b * opt.batch_size;
      uint64_t i1 = std::min(opt.n_rays, i0 + opt.batch_size);
      for (uint64_t i = i0; i < i1; ++i) {
        Ray ray = source.sample_ray(rng, opt.n_rays);
        res.rays_traced += 1;
        res.launched_w += ray.weight;
        detail::trace_one(scene, ray, w0, opt, rng, g, res);
      }
    }
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int wi = 0; wi < workers; ++wi) pool.emplace_back(run_worker, wi);
    for (auto& th : pool) th.join();
  }

  TraceResult total;
  for (int wi = 0; wi < workers; ++wi) total.merge(results[wi]);
  if (grid)
    for (auto& g : grids)
      for (size_t n = 0; n < g.value.size(); ++n) grid->value[n] += g.value[n];
  return total;
}

// Mean deposition depth along +z measured from the first occupied plane of a
// region. Diagnostic for absorption-length checks.
// Grid covering the crystal (or the whole scene when absent), pitch-aligned
// to the crystal base so slab-like deposition lands on voxel planes, with a
// two-voxel margin. Regions are tagged by voxel-center probes.
inline VoxelGrid make_crystal_grid(const Scene& scene, double pitch, int margin = 2) {
  if (pitch <= 0) throw ConfigError("invalid-config: non-positive voxel pitch");
  Vec3 lo, hi;
  if (const Solid* cry = scene.find_region(Region::Crystal)) {
    lo = {cry->base.x - cry->radius, cry->base.y - cry->radius, cry->base.z};
    hi = {cry->base.x + cry->radius, cry->base.y + cry->radius, cry->base.z + cry->length};
  } else {
    lo = scene.bbox_lo;
    hi = scene.bbox_hi;
  }
  auto cells = [&](double ext) {
    return static_cast<uint32_t>(std::ceil(ext / pitch - 1e-9)) + 2 * margin;
  };
  uint32_t nx = cells(hi.x - lo.x), ny = cells(hi.y - lo.y), nz = cells(hi.z - lo.z);
  Vec3 origin{lo.x - margin * pitch, lo.y - margin * pitch, lo.z - margin * pitch};
  VoxelGrid g(nx, ny, nz, origin, pitch);
  for (uint32_t k = 0; k < nz; ++k)
    for (uint32_t j = 0; j < ny; ++j)
      for (uint32_t i = 0; i < nx; ++i)
        g.region[g.index(i, j, k)] =
            static_cast<uint8_t>(scene.region_at(g.center(i, j, k)));
  return g;
}

inline double grid_mean_depth(const VoxelGrid& grid, Region r) {
  uint8_t tag = static_cast<uint8_t>(r);
  double zmin = 1e300;
  for (uint32_t k = 0; k < grid.nz; ++k)
    for (uint32_t j = 0; j < grid.ny; ++j)
      for (uint32_t i = 0; i < grid.nx; ++i)
        if (grid.region[grid.index(i, j, k)] == tag)
          zmin = std::min(zmin, grid.origin.z + k * grid.pitch);
  double sw = 0.0, swz = 0.0;
  for (uint32_t k = 0; k < grid.nz; ++k) {
    double zc = grid.origin.z + (k + 0.5) * grid.pitch;
    for (uint32_t j = 0; j < grid.ny; ++j)
      for (uint32_t i = 0; i < grid.nx; ++i) {
        size_t n = grid.index(i, j, k);
        if (grid.region[n] != tag) continue;
        sw += grid.value[n];
        swz += grid.value[n] * (zc - zmin);
      }
  }
  if (sw <= 0.0) throw NumericError("no deposition in requested region");
  return swz / sw;
}

} // namespace pumpmap
