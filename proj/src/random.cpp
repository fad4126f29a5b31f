#include "embedgeom/random.hpp"

#include <algorithm>
#include <numeric>

namespace embedgeom {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, std::uint64_t seed) {
    m = std::min(m, n);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace embedgeom
