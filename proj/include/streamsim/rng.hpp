#pragma once

#include <cstdint>
#include <random>

namespace streamsim {

// Uniform double in [0, 1) with 53 random bits. Used everywhere instead of
// std::uniform_real_distribution so that streams are reproducible across
// standard library implementations.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// SplitMix64 step; used to derive independent per-replication seeds from a
// master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0xa0761d6478bd642fULL * (index + 1));
  return splitmix64(s);
}

}  // namespace streamsim
