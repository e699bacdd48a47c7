#pragma once

#include <cstdint>
#include <random>

// Portable random helpers. The std:: distributions are implementation
// defined, so every draw that feeds a reproducible artifact goes through
// these instead.
namespace escape::random {

using Engine = std::mt19937_64;

__extension__ typedef unsigned __int128 uint128;

/// SplitMix64 finalizer; a bijective mixing of 64-bit values.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the independent stream identified by (seed, stream_index).
constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                    std::uint64_t stream_index) {
  return mix64(mix64(seed) ^ mix64(stream_index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream_index) {
  return Engine(stream_seed(seed, stream_index));
}

/// Uniform integer in [0, n), n >= 1. Unbiased (Lemire's rejection method).
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
  uint128 m = static_cast<uint128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<uint128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Engine& rng, double p) { return uniform01(rng) < p; }

}  // namespace escape::random
