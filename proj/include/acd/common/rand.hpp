#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace acd {

// splitmix64: fixed-algorithm hash/stream generator used wherever we derive
// child seeds from a parent seed. Unlike std distributions, the output is
// stable across standard libraries, so derived seeds are portable.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combine a seed with tag values (row/col/run indices etc.) into a child seed.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1). 53-bit mantissa construction, avoids
// std::uniform_real_distribution so sequences are implementation-independent.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n). Modulo bias is below 2^-57 for the n used here.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

// Standard normal via Box-Muller on the portable uniform.
inline double normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace acd
