#include "zocr/random.hpp"

#include <cmath>
#include <limits>

namespace zocr {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(master);
    for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01(rng);
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) noexcept {
    // Rejection sampling on the top of the range keeps the result unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % bound;
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_below(rng, span));
}

int poisson(Rng& rng, double mean) noexcept {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double p = uniform01(rng);
    int k = 0;
    while (p > limit) {
        ++k;
        p *= uniform01(rng);
    }
    return k;
}

}  // namespace zocr
