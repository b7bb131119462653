#ifndef QUICKCOUNT_RNG_HPP
#define QUICKCOUNT_RNG_HPP

#include <cstdint>
#include <random>

#include "quickcount/common.hpp"

// Seeding and variate generation used everywhere in the library. All
// randomness is drawn through these helpers rather than <random>
// distributions, whose output sequences are implementation-defined; this
// keeps every result bit-reproducible from a single master seed.

namespace quickcount {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Engine for substream `stream` of master seed `seed`. Substreams are what
/// make replications independently seeded yet reproducible in any execution
/// order (seed_seq expansion is fully specified by the standard).
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(seed ^ 0x5851f42d4c957f2dULL);
  const std::uint64_t c = mix64(stream ^ 0x14057b7ef767814fULL);
  const std::uint64_t d = mix64(a ^ c);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
  return Engine(seq);
}

/// Derived seed for (master, stream) pairs, for APIs that take a seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream ^ 0x9e3779b97f4a7c15ULL));
}

/// Uniform draw strictly inside (0,1): 53 random bits centered in the cell.
inline double uniform01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, n), unbiased via rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  require(n > 0, "rng: uniform_below needs n > 0");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x > limit);
  return x % n;
}

}  // namespace quickcount

#endif
