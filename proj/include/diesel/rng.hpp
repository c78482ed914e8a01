#pragma once

#include <cstdint>

namespace diesel {

// Counter-based random number generation.  Every draw is a pure function of
// (seed, key), so measurement synthesis is reproducible bit-for-bit from a
// single per-trial seed regardless of evaluation order or threading.  The
// standard <random> distributions are implementation-defined, so they are
// avoided for anything that must be byte-stable across platforms.

// SplitMix64 finalizer.
uint64_t mix64(uint64_t x);

// Hash a key tuple into a 64-bit word.
uint64_t hash_key(uint64_t seed, uint64_t k1, uint64_t k2, uint64_t k3, uint64_t k4);

class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  uint64_t seed() const { return seed_; }

  // Uniform in (0, 1].
  double uniform(uint64_t k1, uint64_t k2 = 0, uint64_t k3 = 0, uint64_t k4 = 0) const;

  // Standard normal via Box-Muller on two keyed uniforms.
  double gaussian(uint64_t k1, uint64_t k2 = 0, uint64_t k3 = 0, uint64_t k4 = 0) const;

 private:
  uint64_t seed_;
};

}  // namespace diesel
