#pragma once

#include <cstdint>
#include <random>

namespace aspem {

using Rng = std::mt19937_64;

// splitmix64; used to derive independent streams from one user seed
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(mix_seed(seed) ^ mix_seed(stream + 1)));
}

inline double uniform01(Rng& rng) {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::size_t i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace aspem
