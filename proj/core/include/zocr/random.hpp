#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace zocr {

// All seeded randomness in the toolkit goes through std::mt19937_64, whose
// output sequence is fixed by the standard. Distributions are implemented
// here rather than with <random> distribution classes, whose algorithms are
// implementation-defined and would break cross-platform bit-reproducibility.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a seed from a master seed and a path of integer keys.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng) noexcept;

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi) noexcept;

/// Unbiased uniform integer in [0, bound). bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) noexcept;

/// Uniform integer in [lo, hi] inclusive.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept;

/// Poisson draw by Knuth's multiplication method (fine for small means).
int poisson(Rng& rng, double mean) noexcept;

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace zocr
