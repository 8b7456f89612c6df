#ifndef PRIVGUARD_RANDOM_HPP
#define PRIVGUARD_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace privguard {

/// Name recorded wherever a seeded permutation or draw sequence is persisted.
inline constexpr const char* kGeneratorName = "mt19937_64/rejection-bounded/fisher-yates";

/// Seeded index source whose output is fixed by the C++ standard.
///
/// std::mt19937_64's output sequence is normative, but the standard
/// distributions are not, so bounded draws use plain rejection sampling:
/// draw 64-bit words, discard those at or above the largest multiple of
/// `bound`, reduce the rest modulo `bound`.
class IndexSource {
public:
    explicit IndexSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::size_t below(std::size_t bound);

private:
    std::mt19937_64 engine_;
};

/// Permutation of 0..n-1 by Fisher-Yates (i from n-1 down to 1, j = below(i+1)).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace privguard

#endif  // PRIVGUARD_RANDOM_HPP
