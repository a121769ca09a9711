#pragma once

#include <cstdint>

namespace regulus {

// Seedable, splittable generator (splitmix64 core). Every randomized run in
// the library derives its stream from (seed, stream index), so results are
// reproducible regardless of call interleaving.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
    // draw unbiased and platform-independent.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t x = next();
        while (x >= limit)
            x = next();
        return x % bound;
    }

    int below_int(int bound) { return static_cast<int>(below(static_cast<std::uint64_t>(bound))); }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Independent child stream; deterministic in (current seed, stream).
    Rng split(std::uint64_t stream) const {
        std::uint64_t z = state_ ^ (0xd1b54a32d192ed03ULL + stream * 0x9e6c63d0876a9a35ULL);
        z = (z ^ (z >> 32)) * 0xdaba0b6eb09322e3ULL;
        z = (z ^ (z >> 32)) * 0xdaba0b6eb09322e3ULL;
        return Rng(z ^ (z >> 32));
    }

private:
    std::uint64_t state_;
};

} // namespace regulus
