// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace mss {

/// Deterministic draw helpers on top of std::mt19937_64. The engine's output
/// sequence is pinned by the standard, and these helpers avoid
/// std::*_distribution so results are identical across standard libraries.
namespace rng {

/// Uniform integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = engine();
    } while (v >= limit);
    return v % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double unit(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double unit_positive(std::mt19937_64& engine) {
    return 1.0 - unit(engine);
}

/// Standard normal draw (Box-Muller).
inline double normal(std::mt19937_64& engine) {
    double u1 = unit_positive(engine);
    double u2 = unit(engine);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

} // namespace rng

} // namespace mss
