#pragma once

#include <cstdint>
#include <random>

namespace monocheck {

/// SplitMix64 finalizer; used to derive independent streams from
/// (seed, counter) pairs so stochastic routines do not depend on scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t counter) {
  return std::mt19937_64(mix64(mix64(seed) ^ counter));
}

}  // namespace monocheck
