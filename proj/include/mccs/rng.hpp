#pragma once

#include <cstdint>
#include <random>

// Seed derivation for reproducible Monte Carlo work. Every stochastic
// operation takes an explicit seed; parallel trials get independent
// streams derived from one master seed plus stream labels.

namespace mccs::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed from a master seed and up to three stream labels.
// Deterministic, and distinct labels give decorrelated seeds.
inline std::uint64_t derive(std::uint64_t master, std::uint64_t a = 0,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b + 0xbf58476d1ce4e5b9ULL;
  h ^= splitmix64(s);
  s ^= c + 0x94d049bb133111ebULL;
  h ^= splitmix64(s);
  return h;
}

using Stream = std::mt19937_64;

inline Stream make_stream(std::uint64_t seed) { return Stream(seed); }

}  // namespace mccs::rng
