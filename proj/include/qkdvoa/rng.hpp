#ifndef QKDVOA_RNG_HPP
#define QKDVOA_RNG_HPP

#include <cmath>
#include <cstdint>

#include "qkdvoa/common.hpp"

namespace qkdvoa {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter, lane), so generated series do not depend on
// evaluation order and can be reproduced sample-by-sample.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + 0x9E3779B97F4A7C15ull) ^
                     (stream * 0xBF58476D1CE4E5B9ull + 0x94D049BB133111EBull))) {}

    // Uniform draw in (0, 1]; never returns 0 so log() is safe.
    double uniform(std::uint64_t counter, std::uint32_t lane) const {
        const std::uint64_t w = word(counter, lane);
        return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on two independent lanes.
    double normal(std::uint64_t counter, std::uint32_t lane) const {
        const double u1 = uniform(counter, 2u * lane);
        const double u2 = uniform(counter, 2u * lane + 1u);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    static std::uint64_t mix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t word(std::uint64_t counter, std::uint32_t lane) const {
        const std::uint64_t c = counter * 0xA24BAED4963EE407ull +
                                static_cast<std::uint64_t>(lane) * 0x9FB21C651E98DF25ull;
        return mix64(key_ ^ mix64(c));
    }

    std::uint64_t key_;
};

}  // namespace qkdvoa

#endif
