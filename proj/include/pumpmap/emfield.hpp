// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pumpmap/common.hpp"
#include "pumpmap/config.hpp"
#include "pumpmap/eigsolve.hpp"

namespace pumpmap {

// Closed cylindrical PEC cavity with an axisymmetric dielectric ring and an
// optional support spacer. Lengths in mm.
struct CavitySpec {
  double radius_mm = 18.0;
  double height_mm = 25.0; // ceiling position; the tuning degree of freedom
  double ring_inner_r_mm = 4.5;
  double ring_outer_r_mm = 7.0;
  double ring_z0_mm = 3.0;
  double ring_height_mm = 6.0;
  double ring_eps = 318.0;
  double support_inner_r_mm = 4.5;
  double support_outer_r_mm = 7.0;
  double support_z0_mm = 0.0;
  double support_height_mm = 3.0;
  double support_eps = 2.1; // PTFE stand; 1 disables it
  double mesh_pitch_mm = 0.25;
  double target_ghz = 1.4496;

  static CavitySpec from_config(const Config& c) {
    CavitySpec s;
    s.radius_mm = c.get_double("cavity.radius_mm", s.radius_mm);
    s.height_mm = c.get_double("cavity.height_mm", s.height_mm);
    s.ring_inner_r_mm = c.get_double("cavity.ring_inner_r_mm", s.ring_inner_r_mm);
    s.ring_outer_r_mm = c.get_double("cavity.ring_outer_r_mm", s.ring_outer_r_mm);
    s.ring_z0_mm = c.get_double("cavity.ring_z0_mm", s.ring_z0_mm);
    s.ring_height_mm = c.get_double("cavity.ring_height_mm", s.ring_height_mm);
    s.ring_eps = c.get_double("cavity.ring_eps", s.ring_eps);
    s.support_inner_r_mm = c.get_double("cavity.support_inner_r_mm", s.support_inner_r_mm);
    s.support_outer_r_mm = c.get_double("cavity.support_outer_r_mm", s.support_outer_r_mm);
    s.support_z0_mm = c.get_double("cavity.support_z0_mm", s.support_z0_mm);
    s.support_height_mm = c.get_double("cavity.support_height_mm", s.support_height_mm);
    s.support_eps = c.get_double("cavity.support_eps", s.support_eps);
    s.mesh_pitch_mm = c.get_double("cavity.mesh_pitch_mm", s.mesh_pitch_mm);
    s.target_ghz = c.get_double("cavity.target_ghz", s.target_ghz);
    s.validate();
    return s;
  }

  void validate() const {
    if (radius_mm <= 0 || height_mm <= 0) throw ConfigError("invalid-config: cavity size");
    if (ring_eps < 1.0 || support_eps < 1.0)
      throw ConfigError("invalid-config: permittivity below vacuum");
    if (ring_eps > 1.0) {
      if (ring_inner_r_mm < 0 || ring_outer_r_mm <= ring_inner_r_mm ||
          ring_outer_r_mm > radius_mm)
        throw ConfigError("invalid-config: ring radii");
      if (ring_z0_mm < 0 || ring_z0_mm + ring_height_mm > height_mm)
        throw ConfigError("invalid-config: ring does not fit the cavity height");
    }
    if (mesh_pitch_mm <= 0) throw ConfigError("invalid-config: non-positive mesh pitch");
    if (target_ghz <= 0) throw ConfigError("invalid-config: non-positive target frequency");
  }

  double eps_at(double r, double z) const {
    if (ring_eps > 1.0 && r >= ring_inner_r_mm && r <= ring_outer_r_mm && z >= ring_z0_mm &&
        z <= ring_z0_mm + ring_height_mm)
      return ring_eps;
    if (support_eps > 1.0 && r >= support_inner_r_mm && r <= support_outer_r_mm &&
        z >= support_z0_mm && z <= support_z0_mm + support_height_mm)
      return support_eps;
    return 1.0;
  }

  bool in_ring(double r, double z) const {
    return ring_eps > 1.0 && r >= ring_inner_r_mm && r <= ring_outer_r_mm && z >= ring_z0_mm &&
           z <= ring_z0_mm + ring_height_mm;
  }

  // Permittivity averaged over the dual cell around a node. Dielectric
  // edges rarely land on mesh nodes; sharp point sampling makes the
  // eigenfrequency a sawtooth of the cavity height, which defeats tuning.
  // The rectangle overlap is exact for the axis-aligned ring and support.
  double eps_cell(double r, double z, double dr, double dz) const {
    auto frac1d = [](double a0, double a1, double b0, double b1) {
      double lo = std::max(a0, b0), hi = std::min(a1, b1);
      return hi > lo ? (hi - lo) / (a1 - a0) : 0.0;
    };
    double e = 1.0;
    if (ring_eps > 1.0)
      e += (ring_eps - 1.0) *
           frac1d(r - 0.5 * dr, r + 0.5 * dr, ring_inner_r_mm, ring_outer_r_mm) *
           frac1d(z - 0.5 * dz, z + 0.5 * dz, ring_z0_mm, ring_z0_mm + ring_height_mm);
    if (support_eps > 1.0)
      e += (support_eps - 1.0) *
           frac1d(r - 0.5 * dr, r + 0.5 * dr, support_inner_r_mm, support_outer_r_mm) *
           frac1d(z - 0.5 * dz, z + 0.5 * dz, support_z0_mm, support_z0_mm + support_height_mm);
    return e;
  }
};

// Node-sampled |B| map of one azimuthally symmetric mode. Binary "FMP1",
// little-endian: magic, u32 nr nz (node counts), f64 r0 z0 dr dz freq_ghz,
// f64 br[nr*nz], f64 bz[nr*nz], r fastest. Units: tesla under the convention
// that the stored magnetic energy integral(|B|^2 / 2 mu0) dV equals 1 J.
class FieldMap {
 public:
  uint32_t nr = 0, nz = 0; // node counts
  double r0 = 0.0, z0 = 0.0;
  double dr = 0.0, dz = 0.0;
  double freq_ghz = 0.0;
  std::vector<double> br, bz;

  size_t idx(uint32_t i, uint32_t j) const { return size_t(j) * nr + i; }

  // Trapezoid-in-(r,z) magnetic energy, joules; dV = 2 pi r dr dz in mm^3.
  double energy_joules() const {
    double s = 0.0;
    for (uint32_t j = 0; j < nz; ++j) {
      double wz = (j == 0 || j + 1 == nz) ? 0.5 : 1.0;
      for (uint32_t i = 0; i < nr; ++i) {
        double wr = (i == 0 || i + 1 == nr) ? 0.5 : 1.0;
        double r = r0 + i * dr;
        size_t n = idx(i, j);
        s += wr * wz * r * (br[n] * br[n] + bz[n] * bz[n]);
      }
    }
    return s * 2.0 * kPi * dr * dz * 1e-9 / (2.0 * kMu0);
  }

  // Scale so the stored magnetic energy equals `target_joules`.
  void normalize_energy(double target_joules) {
    double e = energy_joules();
    if (e <= 0.0) throw NumericError("cannot normalize an empty field map");
    double s = std::sqrt(target_joules / e);
    for (auto& v : br) v *= s;
    for (auto& v : bz) v *= s;
  }

  // |B|^2 at a cavity-frame point, bilinear per component; zero outside the
  // cavity volume.
  double sample_b2(double x, double y, double z) const {
    double r = std::sqrt(x * x + y * y);
    double fu = (r - r0) / dr;
    double fv = (z - z0) / dz;
    if (fu < 0.0 || fv < 0.0 || fu > nr - 1 || fv > nz - 1) return 0.0;
    uint32_t i = std::min(uint32_t(fu), nr - 2);
    uint32_t j = std::min(uint32_t(fv), nz - 2);
    double a = fu - i, b = fv - j;
    auto lerp2 = [&](const std::vector<double>& f) {
      return (1 - a) * (1 - b) * f[idx(i, j)] + a * (1 - b) * f[idx(i + 1, j)] +
             (1 - a) * b * f[idx(i, j + 1)] + a * b * f[idx(i + 1, j + 1)];
    };
    double vr = lerp2(br), vz = lerp2(bz);
    return vr * vr + vz * vz;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write field map: " + path);
    out.write("FMP1", 4);
    auto put_u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(nr);
    put_u32(nz);
    put_f64(r0);
    put_f64(z0);
    put_f64(dr);
    put_f64(dz);
    put_f64(freq_ghz);
    out.write(reinterpret_cast<const char*>(br.data()),
              static_cast<std::streamsize>(br.size() * 8));
    out.write(reinterpret_cast<const char*>(bz.data()),
              static_cast<std::streamsize>(bz.size() * 8));
    if (!out) throw IoError("short write on field map: " + path);
  }

  static FieldMap read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open field map: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FMP1", 4) != 0)
      throw IoError("not an FMP1 field map: " + path);
    FieldMap f;
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
    f.nr = get_u32();
    f.nz = get_u32();
    f.r0 = get_f64();
    f.z0 = get_f64();
    f.dr = get_f64();
    f.dz = get_f64();
    f.freq_ghz = get_f64();
    if (!in || f.nr < 2 || f.nz < 2 || f.dr <= 0 || f.dz <= 0)
      throw IoError("corrupt FMP1 header: " + path);
    size_t n = size_t(f.nr) * f.nz;
    f.br.resize(n);
    f.bz.resize(n);
    in.read(reinterpret_cast<char*>(f.br.data()), static_cast<std::streamsize>(n * 8));
    in.read(reinterpret_cast<char*>(f.bz.data()), static_cast<std::streamsize>(n * 8));
    if (!in) throw IoError("truncated FMP1 payload: " + path);
    return f;
  }
};

struct ModeResult {
  double freq_ghz = 0.0;
  double lambda = 0.0; // k0^2, 1/mm^2
  double residual = 0.0;
  double ring_energy_fraction = 0.0; // electric energy share inside the ring
  FieldMap field;
  std::vector<double> e_phi; // node values, same layout as the field map
};

// Azimuthally symmetric TE mode (E = E_phi(r,z) only) of the loaded cavity
// nearest the target frequency. Scalar Helmholtz problem
//   E'' + E'/r - E/r^2 + d2E/dz2 + k0^2 eps E = 0,  E = 0 on axis and walls,
// discretized with second-order differences; rows scaled by r to get a
// symmetric pencil A u = k0^2 M u with M = diag(r eps). With a dielectric
// ring present, candidates must hold over half their electric energy in the
// ring (TE01d signature); the pick must land within +-30% of target_ghz.
inline ModeResult solve_te0_mode(const CavitySpec& spec, double mesh_pitch_mm = 0.0,
                                 double target_ghz = 0.0, int n_candidates = 6,
                                 double tol = 1e-10) {
  if (mesh_pitch_mm <= 0.0) mesh_pitch_mm = spec.mesh_pitch_mm;
  if (target_ghz <= 0.0) target_ghz = spec.target_ghz;
  if (spec.ring_eps > 1.0 &&
      (spec.ring_outer_r_mm - spec.ring_inner_r_mm) / mesh_pitch_mm < 8.0)
    throw NumericError("mesh-too-coarse: fewer than 8 cells across the ring wall");
  const uint32_t nr = std::max<uint32_t>(8, std::lround(spec.radius_mm / mesh_pitch_mm));
  const uint32_t nz = std::max<uint32_t>(8, std::lround(spec.height_mm / mesh_pitch_mm));
  const double dr = spec.radius_mm / nr;
  const double dz = spec.height_mm / nz;
  const int ni = nr - 1, nj = nz - 1; // interior node counts
  const int n = ni * nj;
  auto id = [&](int i, int j) { return j * ni + i; }; // i:0..ni-1 -> r=(i+1)dr

  std::vector<Eigen::Triplet<double>> ta, tm;
  ta.reserve(size_t(n) * 5);
  tm.reserve(n);
  for (int j = 0; j < nj; ++j) {
    double z = (j + 1) * dz;
    for (int i = 0; i < ni; ++i) {
      double r = (i + 1) * dr;
      double diag = 2.0 * r / (dr * dr) + 2.0 * r / (dz * dz) + 1.0 / r;
      ta.emplace_back(id(i, j), id(i, j), diag);
      if (i + 1 < ni) {
        double c = -(r + 0.5 * dr) / (dr * dr);
        ta.emplace_back(id(i, j), id(i + 1, j), c);
        ta.emplace_back(id(i + 1, j), id(i, j), c);
      }
      if (j + 1 < nj) {
        double c = -r / (dz * dz);
        ta.emplace_back(id(i, j), id(i, j + 1), c);
        ta.emplace_back(id(i, j + 1), id(i, j), c);
      }
      tm.emplace_back(id(i, j), id(i, j), r * spec.eps_cell(r, z, dr, dz));
    }
  }
  Eigen::SparseMatrix<double> A(n, n), M(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  M.setFromTriplets(tm.begin(), tm.end());

  // Shift slightly below the target wavenumber; the 0.97 factor keeps the
  // shifted matrix away from singularity when the target is dead on.
  double k_target = 2.0 * kPi * target_ghz / kSpeedOfLightMmPerNs;
  EigResult eig = eig_nearest(A, M, 0.97 * k_target * k_target, n_candidates, tol);

  auto freq_of = [&](double lambda) {
    return std::sqrt(std::max(0.0, lambda)) * kSpeedOfLightMmPerNs / (2.0 * kPi);
  };
  std::vector<int> order(eig.values.size());
  for (size_t p = 0; p < order.size(); ++p) order[p] = static_cast<int>(p);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(freq_of(eig.values[a]) - target_ghz) <
           std::abs(freq_of(eig.values[b]) - target_ghz);
  });

  bool want_ring = spec.ring_eps > 1.0;
  for (int p : order) {
    if (eig.values[p] <= 0.0) continue;
    if (std::abs(freq_of(eig.values[p]) - target_ghz) > 0.30 * target_ghz) continue;
    // Electric energy density ~ eps |E|^2; ring share discriminates the
    // ring mode from box modes of the outer cavity.
    double w_all = 0.0, w_ring = 0.0;
    for (int j = 0; j < nj; ++j) {
      double z = (j + 1) * dz;
      for (int i = 0; i < ni; ++i) {
        double r = (i + 1) * dr;
        double e = eig.vectors(id(i, j), p);
        double u = spec.eps_cell(r, z, dr, dz) * r * e * e;
        w_all += u;
        if (spec.in_ring(r, z)) w_ring += u;
      }
    }
    double frac = w_all > 0.0 ? w_ring / w_all : 0.0;
    if (want_ring && frac <= 0.5) continue;

    ModeResult out;
    out.lambda = eig.values[p];
    out.freq_ghz = std::sqrt(out.lambda) * kSpeedOfLightMmPerNs / (2.0 * kPi);
    out.residual = eig.residuals[p];
    out.ring_energy_fraction = frac;

    // Full node grid incl. boundaries (all-zero E there).
    uint32_t nrn = nr + 1, nzn = nz + 1;
    std::vector<double> E(size_t(nrn) * nzn, 0.0);
    auto nid = [&](uint32_t i, uint32_t j) { return size_t(j) * nrn + i; };
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i) E[nid(i + 1, j + 1)] = eig.vectors(id(i, j), p);

    FieldMap f;
    f.nr = nrn;
    f.nz = nzn;
    f.r0 = 0.0;
    f.z0 = 0.0;
    f.dr = dr;
    f.dz = dz;
    f.freq_ghz = out.freq_ghz;
    f.br.assign(E.size(), 0.0);
    f.bz.assign(E.size(), 0.0);
    for (uint32_t j = 0; j < nzn; ++j) {
      for (uint32_t i = 0; i < nrn; ++i) {
        // b_r = -dE/dz, b_z = (1/r) d(rE)/dr, central where possible.
        double dEdz;
        if (j == 0)
          dEdz = (E[nid(i, 1)] - E[nid(i, 0)]) / dz;
        else if (j + 1 == nzn)
          dEdz = (E[nid(i, j)] - E[nid(i, j - 1)]) / dz;
        else
          dEdz = (E[nid(i, j + 1)] - E[nid(i, j - 1)]) / (2.0 * dz);
        double bzv;
        if (i == 0) {
          bzv = 2.0 * E[nid(1, j)] / dr; // axis limit of (1/r)(rE)'
        } else {
          double r = i * dr;
          double rEp, rEm;
          if (i + 1 == nrn) {
            rEp = r * E[nid(i, j)];
            rEm = (r - dr) * E[nid(i - 1, j)];
            bzv = (rEp - rEm) / (r * dr);
          } else {
            rEp = (r + dr) * E[nid(i + 1, j)];
            rEm = (r - dr) * E[nid(i - 1, j)];
            bzv = (rEp - rEm) / (r * 2.0 * dr);
          }
        }
        f.br[f.idx(i, j)] = -dEdz;
        f.bz[f.idx(i, j)] = bzv;
      }
    }
    f.normalize_energy(1.0);
    out.field = std::move(f);
    out.e_phi = std::move(E);
    return out;
  }
  throw NumericError("no-mode-found: no qualifying eigenpair within 30% of " +
                     std::to_string(target_ghz) + " GHz among " +
                     std::to_string(eig.values.size()) + " candidates");
}

// Read an FMP1 file and enforce the 1 J convention. Returns true in .second
// when the stored data needed renormalization (off by more than 1e-6).
inline std::pair<FieldMap, bool> import_field_map(const std::string& path) {
  FieldMap f = FieldMap::read(path);
  double e = f.energy_joules();
  if (e <= 0.0) throw IoError("field map carries no magnetic energy: " + path);
  bool renorm = std::abs(e - 1.0) > 1e-6;
  if (renorm) f.normalize_energy(1.0);
  return {std::move(f), renorm};
}

// Move the cavity ceiling (total height) until the mode lands on the target
// frequency. Frequency decreases monotonically with height for the ring
// fundamental; plain bisection.
struct TuneResult {
  CavitySpec spec;
  ModeResult mode;
  int iterations = 0;
};

inline TuneResult tune_ceiling(CavitySpec spec, double target_ghz, double h_min_mm,
                               double h_max_mm, double tol_ghz = 5e-4, int max_iter = 60) {
  if (h_min_mm >= h_max_mm) throw ConfigError("invalid-config: tuning range");
  auto solve_at = [&](double h) {
    CavitySpec s = spec;
    s.height_mm = h;
    s.validate();
    return std::make_pair(s, solve_te0_mode(s));
  };
  auto [s_lo, m_lo] = solve_at(h_min_mm); // smallest height -> highest f
  auto [s_hi, m_hi] = solve_at(h_max_mm);
  if (!(m_hi.freq_ghz <= target_ghz && target_ghz <= m_lo.freq_ghz))
    throw NumericError("tuning target " + std::to_string(target_ghz) +
                       " GHz outside reachable band [" + std::to_string(m_hi.freq_ghz) + ", " +
                       std::to_string(m_lo.freq_ghz) + "]");
  double a = h_min_mm, b = h_max_mm;
  TuneResult best;
  best.iterations = 2;
  if (std::abs(m_lo.freq_ghz - target_ghz) < std::abs(m_hi.freq_ghz - target_ghz)) {
    best.spec = s_lo;
    best.mode = std::move(m_lo);
  } else {
    best.spec = s_hi;
    best.mode = std::move(m_hi);
  }
  for (int it = 0; it < max_iter; ++it) {
    double h = 0.5 * (a + b);
    auto [s, m] = solve_at(h);
    best.iterations = it + 3;
    double f = m.freq_ghz;
    if (std::abs(f - target_ghz) < std::abs(best.mode.freq_ghz - target_ghz)) {
      best.spec = s;
      best.mode = std::move(m);
    }
    if (std::abs(best.mode.freq_ghz - target_ghz) <= 0.2 * tol_ghz) break;
    if (f > target_ghz)
      a = h; // frequency falls with height: move the ceiling up
    else
      b = h;
  }
  if (std::abs(best.mode.freq_ghz - target_ghz) > tol_ghz)
    throw NumericError("ceiling tuning stalled at " + std::to_string(best.mode.freq_ghz) +
                       " GHz for target " + std::to_string(target_ghz));
  return best;
}

} // namespace pumpmap
