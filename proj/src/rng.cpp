#include "diesel/rng.hpp"

#include <cmath>

namespace diesel {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t hash_key(uint64_t seed, uint64_t k1, uint64_t k2, uint64_t k3, uint64_t k4) {
  uint64_t h = mix64(seed);
  h = mix64(h ^ k1);
  h = mix64(h ^ k2);
  h = mix64(h ^ k3);
  h = mix64(h ^ k4);
  return h;
}

double CounterRng::uniform(uint64_t k1, uint64_t k2, uint64_t k3, uint64_t k4) const {
  const uint64_t h = hash_key(seed_, k1, k2, k3, k4);
  // 53 mantissa bits, shifted into (0, 1].
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::gaussian(uint64_t k1, uint64_t k2, uint64_t k3, uint64_t k4) const {
  const uint64_t h = hash_key(seed_, k1, k2, k3, k4);
  const double u1 = static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace diesel
