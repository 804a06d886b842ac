#pragma once

#include <cstdint>
#include <random>

namespace densadapt {

// All randomness in the project flows through a seeded mt19937_64. The
// mapping helpers below avoid std::uniform_*_distribution, whose output
// sequence is implementation-defined; this way identical seeds give
// identical streams on every platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // Rejection-free modulo is fine here; n is always tiny relative to 2^64.
    return rng() % n;
}

/// Standard normal via Box-Muller (two uniforms per pair, second discarded).
inline double gaussian(Rng& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace densadapt
