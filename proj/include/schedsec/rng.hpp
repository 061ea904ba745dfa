#pragma once

#include <cstdint>
#include <random>

namespace schedsec {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Engine for stream `stream` of a master seed. Trial k of a Monte Carlo run
/// always gets the same generator regardless of scheduling order.
inline Engine stream_engine(std::uint64_t master_seed, std::uint64_t stream) {
    return Engine(splitmix64(master_seed ^ splitmix64(stream + 1)));
}

/// Uniform integer in [0, n) by rejection, independent of the standard
/// library's distribution implementation.
inline std::uint64_t uniform_below(Engine &eng, std::uint64_t n) {
    if (n <= 1)
        return 0;
    // 2^64 mod n; draws at or above 2^64 - rem would bias the low residues
    const std::uint64_t rem = (Engine::max() % n + 1) % n;
    for (;;) {
        const std::uint64_t v = eng();
        if (rem == 0 || v < std::uint64_t{0} - rem)
            return v % n;
    }
}

} // namespace schedsec
