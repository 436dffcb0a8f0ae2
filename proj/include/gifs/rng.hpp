#pragma once

#include <cstdint>
#include <random>

namespace gifs {

// All randomness in the library flows from a single 64-bit seed through
// fixed per-subsystem stream offsets, so concurrent subsystems draw from
// independent, reproducible streams.
enum class RngStream : std::uint64_t {
  hutchinson = 1,
  cylinder = 2,
  contraction = 3,
  verify = 4,
  tests = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream,
                                std::uint64_t counter = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
  s = splitmix64(s ^ counter);
  return std::mt19937_64(s);
}

}  // namespace gifs
