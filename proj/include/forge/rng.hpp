#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace forge::rng {

// Small deterministic generator (splitmix64). Used everywhere instead of the
// standard library engines so that sampling results are bit-stable across
// platforms and standard-library versions.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    // Uniform in [lo, hi] inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

private:
    std::uint64_t state_;
};

// Counter-based seed split: one pipeline seed plus (stream, counter) yields
// independent per-call seeds without any shared generator state.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t counter) {
    SplitMix mix(root ^ (stream * 0x9e3779b97f4a7c15ULL) ^
                 (counter * 0xc2b2ae3d27d4eb4fULL));
    mix.next();
    return mix.next();
}

// Uniform subset of {0, ..., population-1} without replacement, returned in
// ascending order. Partial Fisher-Yates.
inline std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                           std::size_t count,
                                                           std::uint64_t seed) {
    std::vector<std::size_t> pool(population);
    for (std::size_t i = 0; i < population; ++i) pool[i] = i;
    SplitMix rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace forge::rng
