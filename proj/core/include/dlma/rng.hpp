#pragma once

#include <cstdint>
#include <random>

namespace dlma {

// Single generator per run. Every stochastic decision in a simulation draws
// from one shared Rng in a fixed order, so a (config, seed) pair fully
// determines the trajectory.
using Rng = std::mt19937_64;

// Uniform double in [0, 1). Hand-rolled from raw 64-bit output because
// std::uniform_real_distribution is not bit-reproducible across standard
// library implementations.
inline double uniform01(Rng& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling on the top of the 64-bit
// range keeps the draw unbiased and platform-independent.
inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = g();
    while (x >= limit) x = g();
    return x % n;
}

// Uniform integer in [lo, hi] inclusive.
inline std::int64_t uniform_int_incl(Rng& g, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_index(g, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Bernoulli draw with success probability p.
inline bool bernoulli(Rng& g, double p) {
    return uniform01(g) < p;
}

}  // namespace dlma
