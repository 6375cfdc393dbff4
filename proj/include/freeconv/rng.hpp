#pragma once

#include <cmath>
#include <cstdint>

namespace freeconv {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so sampling order and threading never
// change the output.
namespace rng {

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (stream + 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ (counter + 0x94d049bb133111ebULL));
    return h;
}

/// Uniform in (0,1); never returns 0 so it is safe under log().
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t bits = hash3(seed, stream, counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; draw index k consumes uniforms (2k, 2k+1).
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const double u1 = uniform(seed, stream, 2 * counter);
    const double u2 = uniform(seed, stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

} // namespace rng
} // namespace freeconv
