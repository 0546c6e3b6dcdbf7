#pragma once

#include <cstdint>
#include <random>

namespace seqid {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the index-th independent stream derived from a base seed.
inline constexpr std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t index) {
  return base_seed ^ splitmix64(index);
}

}  // namespace seqid
