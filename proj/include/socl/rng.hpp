#pragma once

#include <cstdint>

namespace socl {

/**
 * Counter-based random number generation.
 *
 * Every draw is a pure function of (seed, domain, a, b, c): there is no
 * generator state, so concurrent consumers always see the same numbers no
 * matter how work is scheduled. Uniforms come from a splitmix64-style key
 * hash; normals from the AS241 (PPND16) inverse normal CDF, which is plain
 * rational-polynomial arithmetic and therefore reproducible across platforms.
 */
namespace rng {

/// Stream domains keep independent consumers from colliding on keys.
enum Domain : std::uint64_t {
  kRollout = 1,        // (run, step, coordinate)
  kDpExpectation = 2,  // (time, grid index, sample)
  kTestPoints = 3,     // derivative-check sampling
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t domain,
                              std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ domain);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

/// Uniform draw in the open interval (0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t domain,
                      std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  const std::uint64_t h = hash_key(seed, domain, a, b, c);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Inverse of the standard normal CDF, Wichura's algorithm AS241 (PPND16).
/// Absolute error below 1e-15 over (0,1).
double inverse_normal_cdf(double p);

/// Standard normal draw for the given key.
inline double normal(std::uint64_t seed, std::uint64_t domain,
                     std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return inverse_normal_cdf(uniform(seed, domain, a, b, c));
}

}  // namespace rng
}  // namespace socl
