#include "privguard/random.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace privguard {

std::size_t IndexSource::below(std::size_t bound)
{
    if (bound == 0) {
        throw std::invalid_argument("IndexSource::below: bound must be positive");
    }
    const std::uint64_t b = bound;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % b);
    std::uint64_t word = engine_();
    while (word >= limit) {
        word = engine_();
    }
    return static_cast<std::size_t>(word % b);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    IndexSource source(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = source.below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace privguard
