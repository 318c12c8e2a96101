#pragma once

#include <cstdint>
#include <random>

namespace arcscan::rng {

// splitmix64 step; used to derive independent seed streams from one master
// seed so that per-image / per-repetition work is order-independent.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b));
  return splitmix64(s ^ splitmix64(c));
}

// Stream tags keep unrelated consumers of the same master seed decoupled.
enum StreamTag : std::uint64_t {
  kDatagen = 1,
  kNoise = 2,
  kSplit = 3,
  kPso = 4,
  kRandomArcs = 5,
  kRfe = 6,
};

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace arcscan::rng
