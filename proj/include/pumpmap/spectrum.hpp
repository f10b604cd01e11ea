// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pumpmap/common.hpp"
#include "pumpmap/rng.hpp"

namespace pumpmap {

// Tabulated spectrum: ordered (wavelength_nm, value) pairs. Emission spectra
// are relative; absorption spectra are in 1/mm.
struct Spectrum {
  enum class Kind { Emission, Absorption };

  Kind kind = Kind::Emission;
  std::vector<std::pair<double, double>> samples;

  void validate() const {
    if (samples.size() < 2) throw ConfigError("spectrum needs at least 2 samples");
    for (size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].second < 0.0) throw ConfigError("spectrum value < 0");
      if (i > 0 && samples[i].first <= samples[i - 1].first)
        throw ConfigError("spectrum wavelengths must be strictly increasing");
    }
    if (kind == Kind::Emission && integral() <= 0.0)
      throw ConfigError("emission spectrum integrates to zero");
  }

  double lambda_min() const { return samples.front().first; }
  double lambda_max() const { return samples.back().first; }

  // Linear interpolation; outside the tabulated domain throws.
  double at(double lambda_nm) const {
    if (lambda_nm < lambda_min() || lambda_nm > lambda_max())
      throw NumericError("wavelength outside spectrum domain");
    auto it = std::lower_bound(samples.begin(), samples.end(), lambda_nm,
                               [](const auto& p, double v) { return p.first < v; });
    if (it == samples.begin()) return it->second;
    auto lo = std::prev(it);
    if (it == samples.end()) return lo->second;
    double t = (lambda_nm - lo->first) / (it->first - lo->first);
    return lo->second + t * (it->second - lo->second);
  }

  double integral() const {
    double s = 0.0;
    for (size_t i = 1; i < samples.size(); ++i)
      s += 0.5 * (samples[i].second + samples[i - 1].second) *
           (samples[i].first - samples[i - 1].first);
    return s;
  }

  // Two-column CSV with a `wavelength_nm,value` header, LF line endings.
  static Spectrum load_csv(const std::string& path, Kind kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spectrum file: " + path);
    Spectrum s;
    s.kind = kind;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty spectrum file: " + path);
    if (line != "wavelength_nm,value")
      throw IoError(path + ": expected header `wavelength_nm,value`");
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw IoError(path + ":" + std::to_string(lineno) + ": expected two columns");
      try {
        double wl = std::stod(line.substr(0, comma));
        double v = std::stod(line.substr(comma + 1));
        s.samples.emplace_back(wl, v);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad number");
      }
    }
    s.validate();
    return s;
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write spectrum file: " + path);
    out << "wavelength_nm,value\n";
    out.precision(17);
    for (const auto& [wl, v] : samples) out << wl << "," << v << "\n";
  }
};

// Emission-weighted mean of the absorption coefficient, trapezoidal on the
// union grid of both tabulations.
inline double effective_absorption(const Spectrum& emission, const Spectrum& absorption) {
  emission.validate();
  absorption.validate();
  if (emission.lambda_min() < absorption.lambda_min() ||
      emission.lambda_max() > absorption.lambda_max())
    throw NumericError("domain-mismatch: emission support outside absorption spectrum domain");

  std::vector<double> grid;
  for (const auto& [wl, v] : emission.samples) grid.push_back(wl);
  for (const auto& [wl, v] : absorption.samples)
    if (wl >= emission.lambda_min() && wl <= emission.lambda_max()) grid.push_back(wl);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double num = 0.0, den = 0.0;
  auto f = [&](double wl) { return emission.at(wl); };
  auto g = [&](double wl) { return emission.at(wl) * absorption.at(wl); };
  for (size_t i = 1; i < grid.size(); ++i) {
    double h = grid[i] - grid[i - 1];
    num += 0.5 * (g(grid[i]) + g(grid[i - 1])) * h;
    den += 0.5 * (f(grid[i]) + f(grid[i - 1])) * h;
  }
  if (den <= 0.0) throw NumericError("emission spectrum integrates to zero on union grid");
  return num / den;
}

// Inverse-CDF sampler for a piecewise-linear emission density.
class SpectrumSampler {
 public:
  explicit SpectrumSampler(const Spectrum& s) : spec_(s) {
    spec_.validate();
    cdf_.resize(spec_.samples.size(), 0.0);
    for (size_t i = 1; i < spec_.samples.size(); ++i) {
      const auto& [x0, v0] = spec_.samples[i - 1];
      const auto& [x1, v1] = spec_.samples[i];
      cdf_[i] = cdf_[i - 1] + 0.5 * (v0 + v1) * (x1 - x0);
    }
  }

  double sample(RngStream& rng) const {
    double target = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    size_t i = std::min(static_cast<size_t>(it - cdf_.begin()), cdf_.size() - 1);
    if (i == 0) i = 1;
    const auto& [x0, v0] = spec_.samples[i - 1];
    const auto& [x1, v1] = spec_.samples[i];
    double r = target - cdf_[i - 1];
    double slope = (v1 - v0) / (x1 - x0);
    // Solve 0.5*slope*t^2 + v0*t = r for t in [0, x1-x0].
    double t;
    if (std::abs(slope) < 1e-300) {
      t = v0 > 0.0 ? r / v0 : 0.0;
    } else {
      double disc = v0 * v0 + 2.0 * slope * r;
      t = (-v0 + std::sqrt(std::max(0.0, disc))) / slope;
    }
    return x0 + std::clamp(t, 0.0, x1 - x0);
  }

 private:
  Spectrum spec_;
  std::vector<double> cdf_;
};

} // namespace pumpmap
