// SPDX-License-Identifier: MIT
/**
 * @file rng.hpp
 * @brief Per-path random streams: SplitMix64 seeding into xoshiro256**.
 *
 * Stream k of a batch is a pure function of (seed, k), so ensembles do not
 * depend on how paths are distributed over worker threads.
 */

#pragma once

#include <bit>
#include <cstdint>

namespace fellerlab {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// A seed for a sub-experiment labelled by `label`, independent of the parent stream.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept {
    std::uint64_t state = seed ^ (label * 0xD6E8FEB86659FD93ULL);
    return splitmix64(state);
}

class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream) noexcept {
        std::uint64_t mix = seed;
        std::uint64_t key = splitmix64(mix);
        std::uint64_t sidx = stream ^ 0xD1B54A32D192ED03ULL;
        key ^= splitmix64(sidx);
        for (auto& word : s_) word = splitmix64(key);
    }

    [[nodiscard]] std::uint64_t next() noexcept {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe to take the logarithm of.
    [[nodiscard]] double uniform_open0() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

private:
    std::uint64_t s_[4];
};

}  // namespace fellerlab
