// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace pumpmap {

// Deterministic random stream addressed by (seed, stream index).
//
// Streams are independent mt19937_64 engines keyed through std::seed_seq,
// which is fully specified by the standard, so identical (seed, stream)
// pairs reproduce identical sequences on any conforming platform. Doubles
// are built from the top 53 bits rather than through
// std::uniform_real_distribution, whose output is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed & 0xffffffffu),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream & 0xffffffffu),
        static_cast<std::uint32_t>(stream >> 32),
    };
    engine_.seed(seq);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Per-point seed derivation for sweeps: splitmix64 of (seed, index) so
// neighbouring points do not share low-entropy seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

} // namespace pumpmap
