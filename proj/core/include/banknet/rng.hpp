#pragma once

#include <cstdint>
#include <array>

#include "banknet/normal.hpp"

namespace banknet {

/// Philox4x32-10 counter-based generator.
///
/// Every 128-bit counter value maps independently to 128 random bits, so
/// draw k of stream s is addressable as philox(key, {k, s}) no matter how
/// many workers produce the draws. That is the common-random-numbers
/// contract: same (seed, index) in, same bits out, on every platform and
/// schedule.
class Philox {
public:
    explicit Philox(std::uint64_t seed) : key0_(static_cast<std::uint32_t>(seed)),
                                          key1_(static_cast<std::uint32_t>(seed >> 32)) {}

    /// Four 32-bit words for counter (index, stream).
    std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint64_t stream) const {
        std::uint32_t c0 = static_cast<std::uint32_t>(index);
        std::uint32_t c1 = static_cast<std::uint32_t>(index >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        return {c0, c1, c2, c3};
    }

    /// Two uniforms in the open interval (0,1) from one block.
    std::array<double, 2> uniform2(std::uint64_t index, std::uint64_t stream) const {
        const auto b = block(index, stream);
        const std::uint64_t u0 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
        const std::uint64_t u1 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
        return {to_unit(u0), to_unit(u1)};
    }

    /// Two independent standard normals (inverse-CDF; no rejection, so the
    /// (index, stream) -> value map stays pure).
    std::array<double, 2> normal2(std::uint64_t index, std::uint64_t stream) const {
        const auto u = uniform2(index, stream);
        return {norm_ppf(u[0]), norm_ppf(u[1])};
    }

private:
    static double to_unit(std::uint64_t x) {
        // 53 significant bits, offset keeps the value strictly inside (0,1).
        return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    std::uint32_t key0_;
    std::uint32_t key1_;
};

/// Derives a child seed for a named substream (multi-start points, shocks,
/// etc.) so one user seed drives the whole run without stream collisions.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
    // splitmix64 over seed xor purpose
    std::uint64_t z = seed ^ (purpose * 0x9E3779B97F4A7C15ULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace banknet
