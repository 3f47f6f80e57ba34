#pragma once

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Counter-based: draw i of a stream is a pure function of (seed, i), so
// replications never share state and traces survive refactoring.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace crop {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr const char* kName = "philox4x32-10";

    static constexpr Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9U;
                key[1] += 0xBB67AE85U;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53U} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57U} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// One replication's random stream. Every draw consumes exactly one Philox
/// block, so the stream position equals the number of draws taken.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Uniform on [0, 1).
    double uniform() { return to_unit(next_block()[0]); }

    /// Standard normal via Box-Muller on the two 53-bit halves of one block.
    double normal() {
        const auto b = next_block();
        const double u1 = 1.0 - to_unit(b[0]);  // (0, 1]
        const double u2 = to_unit(b[1]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    [[nodiscard]] std::uint64_t draws() const { return counter_; }

private:
    std::array<std::uint64_t, 2> next_block() {
        const Philox4x32::Counter c{static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32), 0U, 0U};
        ++counter_;
        const auto r = Philox4x32::block(c, key_);
        return {(std::uint64_t{r[1]} << 32) | r[0], (std::uint64_t{r[3]} << 32) | r[2]};
    }

    static double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

    Philox4x32::Key key_;
    std::uint64_t counter_ = 0;
};

}  // namespace crop
