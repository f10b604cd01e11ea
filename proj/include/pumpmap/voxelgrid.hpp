// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pumpmap/common.hpp"

namespace pumpmap {

// Uniform cubic voxel grid holding deposited power density (W/mm^3) plus a
// per-voxel region tag. Binary layout "VGD1", little-endian:
//   char[4] magic, u32 nx ny nz, f64 origin_x origin_y origin_z, f64 pitch,
//   u8 region[n], f64 value[n]   with x fastest, z slowest.
class VoxelGrid {
 public:
  uint32_t nx = 0, ny = 0, nz = 0;
  Vec3 origin;       // centre of voxel (0,0,0) minus pitch/2 in each axis
  double pitch = 0.0;
  std::vector<uint8_t> region;
  std::vector<double> value;

  VoxelGrid() = default;
  VoxelGrid(uint32_t nx_, uint32_t ny_, uint32_t nz_, Vec3 origin_, double pitch_)
      : nx(nx_), ny(ny_), nz(nz_), origin(origin_), pitch(pitch_),
        region(size_t(nx_) * ny_ * nz_, 0), value(size_t(nx_) * ny_ * nz_, 0.0) {
    if (nx == 0 || ny == 0 || nz == 0) throw ConfigError("invalid-config: empty voxel grid");
    if (pitch <= 0.0) throw ConfigError("invalid-config: non-positive voxel pitch");
  }

  size_t count() const { return size_t(nx) * ny * nz; }
  size_t index(uint32_t i, uint32_t j, uint32_t k) const {
    return (size_t(k) * ny + j) * nx + i;
  }
  Vec3 center(uint32_t i, uint32_t j, uint32_t k) const {
    return {origin.x + (i + 0.5) * pitch, origin.y + (j + 0.5) * pitch,
            origin.z + (k + 0.5) * pitch};
  }
  double voxel_volume() const { return pitch * pitch * pitch; }

  bool locate(const Vec3& p, uint32_t& i, uint32_t& j, uint32_t& k) const {
    double fx = (p.x - origin.x) / pitch;
    double fy = (p.y - origin.y) / pitch;
    double fz = (p.z - origin.z) / pitch;
    if (fx < 0.0 || fy < 0.0 || fz < 0.0) return false;
    i = static_cast<uint32_t>(fx);
    j = static_cast<uint32_t>(fy);
    k = static_cast<uint32_t>(fz);
    return i < nx && j < ny && k < nz;
  }

  double total() const {
    double s = 0.0;
    for (double v : value) s += v;
    return s * voxel_volume();
  }

  double total_in_region(Region r) const {
    double s = 0.0;
    uint8_t tag = static_cast<uint8_t>(r);
    for (size_t n = 0; n < value.size(); ++n)
      if (region[n] == tag) s += value[n];
    return s * voxel_volume();
  }

  // Scale all densities so the grid integral equals `target` (typically 1 W
  // of absorbed power). Returns the factor applied.
  double normalize_total(double target) {
    double t = total();
    if (t <= 0.0) throw NumericError("cannot normalize an empty deposition grid");
    double f = target / t;
    for (double& v : value) v *= f;
    return f;
  }

  // Scale all densities so the integral over region-tagged voxels equals
  // `target`. Returns the factor applied.
  double normalize_region(Region r, double target) {
    double t = total_in_region(r);
    if (t <= 0.0) throw NumericError("region-empty: no deposition in region to normalize");
    double f = target / t;
    for (double& v : value) v *= f;
    return f;
  }

  // Projection along an axis (0=x,1=y,2=z): plain sum of densities over the
  // collapsed axis. Multiply a projected map by pitch^3 to recover the power
  // integral of the summed voxels.
  std::vector<double> project(int axis) const {
    if (axis < 0 || axis > 2) throw ConfigError("projection axis must be 0, 1 or 2");
    uint32_t dims[3] = {nx, ny, nz};
    int a = (axis + 1) % 3, b = (axis + 2) % 3;
    if (a > b) std::swap(a, b);
    std::vector<double> img(size_t(dims[a]) * dims[b], 0.0);
    for (uint32_t k = 0; k < nz; ++k)
      for (uint32_t j = 0; j < ny; ++j)
        for (uint32_t i = 0; i < nx; ++i) {
          uint32_t c[3] = {i, j, k};
          img[size_t(c[b]) * dims[a] + c[a]] += value[index(i, j, k)];
        }
    return img;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write grid file: " + path);
    out.write("VGD1", 4);
    auto put_u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(nx);
    put_u32(ny);
    put_u32(nz);
    put_f64(origin.x);
    put_f64(origin.y);
    put_f64(origin.z);
    put_f64(pitch);
    out.write(reinterpret_cast<const char*>(region.data()),
              static_cast<std::streamsize>(region.size()));
    out.write(reinterpret_cast<const char*>(value.data()),
              static_cast<std::streamsize>(value.size() * 8));
    if (!out) throw IoError("short write on grid file: " + path);
  }

  static VoxelGrid read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open grid file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "VGD1", 4) != 0)
      throw IoError("not a VGD1 grid file: " + path);
    VoxelGrid g;
    auto get_u32 = [&] {
      uint32_t v;
      in.read(reinterpret_cast<char*>(&v), 4);
      return v;
    };
    auto get_f64 = [&] {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      return v;
    };
    g.nx = get_u32();
    g.ny = get_u32();
    g.nz = get_u32();
    g.origin.x = get_f64();
    g.origin.y = get_f64();
    g.origin.z = get_f64();
    g.pitch = get_f64();
    if (!in || g.nx == 0 || g.ny == 0 || g.nz == 0 || g.pitch <= 0.0)
      throw IoError("corrupt VGD1 header: " + path);
    size_t n = g.count();
    if (n > (size_t(1) << 31)) throw IoError("VGD1 grid too large: " + path);
    g.region.resize(n);
    g.value.resize(n);
    in.read(reinterpret_cast<char*>(g.region.data()), static_cast<std::streamsize>(n));
    in.read(reinterpret_cast<char*>(g.value.data()), static_cast<std::streamsize>(n * 8));
    if (!in) throw IoError("truncated VGD1 payload: " + path);
    return g;
  }
};

static_assert(sizeof(double) == 8, "file formats assume 8-byte IEEE doubles");

} // namespace pumpmap
