#pragma once

#include <cstdint>
#include <unordered_map>

#include "gaborcs/types.hpp"

namespace gaborcs {

/// Deterministic 64-bit generator (splitmix64 update).  Chosen over
/// std::mt19937 + std::uniform_* because the standard distributions are not
/// bit-portable across implementations, and every experiment here must
/// reproduce exactly from its seed on any platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by rejection; unbiased for any bound.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("SplitMix64::next_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

/// Stream roles keep the draws used for different purposes within one trial
/// statistically independent and individually reproducible.
enum class SeedRole : std::uint64_t {
    Window = 1,
    Support = 2,
    CoeffPhase = 3,
    CoeffMagnitude = 4,
    SolverInit = 5,
    Probe = 6,
};

/// Derive a per-trial, per-role seed from a master seed.  Pure function of
/// its arguments, so trials can run in any order (or in parallel) and adding
/// trials never perturbs earlier ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedRole role) {
    SplitMix64 mix(master);
    std::uint64_t h = mix.next_u64();
    SplitMix64 mix2(h ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(role) + 1)));
    std::uint64_t h2 = mix2.next_u64();
    SplitMix64 mix3(h2 ^ index);
    return mix3.next_u64();
}

/// Trials are keyed by (sparsity, trial) so that every row of a sparsity
/// sweep gets its own independent stream.
inline std::uint64_t trial_key(int sparsity, int trial) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(sparsity)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial));
}

/// Uniform support of given size over the n x n time-frequency grid, drawn
/// without replacement via a partial Fisher-Yates shuffle.  Only the touched
/// slots of the virtual array [0, n^2) are materialised, so large grids cost
/// O(size) memory.
inline SupportSet sample_uniform_support(int n, int size, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("sample_uniform_support: n must be positive");
    const std::uint64_t total = static_cast<std::uint64_t>(n) * n;
    if (size < 0 || static_cast<std::uint64_t>(size) > total)
        throw std::invalid_argument("sample_uniform_support: size outside [0, n^2]");
    SplitMix64 rng(seed);
    std::unordered_map<std::uint64_t, std::uint64_t> moved;
    auto slot = [&moved](std::uint64_t i) {
        auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    std::vector<TFIndex> picked;
    picked.reserve(static_cast<std::size_t>(size));
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(size); ++i) {
        std::uint64_t j = i + rng.next_below(total - i);
        std::uint64_t vi = slot(i);
        std::uint64_t vj = slot(j);
        moved[j] = vi;
        picked.push_back(tf_from_column(static_cast<int>(vj), n));
    }
    return SupportSet(n, std::move(picked));
}

}  // namespace gaborcs
