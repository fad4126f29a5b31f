#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace embedgeom {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (run seed, stream id), e.g. a cluster id.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Counter-based draw in [0, bound): the value depends only on
/// (seed, counter), so draws can be produced in any order or in parallel.
inline std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t counter, std::uint64_t bound) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(splitmix64(derive_seed(seed, counter))) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
}

/// `m` distinct indices from [0, n) by partial Fisher-Yates. Returned in
/// ascending order so downstream reductions do not depend on draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace embedgeom
