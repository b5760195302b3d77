#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ahead {

// std::uniform_real_distribution / std::normal_distribution are
// implementation-defined; these mappings keep seeded artifacts identical
// across standard libraries.

/// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [-1, 1).
inline double uniform_pm1(std::mt19937_64& gen) {
  return 2.0 * uniform01(gen) - 1.0;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Standard normal via Box-Muller (two draws per value).
inline double gaussian(std::mt19937_64& gen) {
  double u1 = 1.0 - uniform01(gen);  // (0, 1]
  double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace ahead
