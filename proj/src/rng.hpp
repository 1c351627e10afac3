#pragma once

#include <cstdint>
#include <random>

namespace mdpdistill::detail {

// Explicit draws so that results do not depend on the standard library's distribution classes.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double uniform_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

/// Independent stream for run `index` of a batch seeded with `seed`.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace mdpdistill::detail
