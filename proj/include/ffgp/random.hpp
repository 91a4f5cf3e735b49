// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_RANDOM_HPP
#define FFGP_RANDOM_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace ffgp {

namespace detail {
    constexpr auto splitmix64(std::uint64_t& state) noexcept -> std::uint64_t
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31U);
    }

    constexpr auto rotl(std::uint64_t x, int k) noexcept -> std::uint64_t
    {
        return (x << k) | (x >> (64 - k));
    }
} // namespace detail

// Mixes a parent key and a child index into an independent 64-bit key.
constexpr auto derive_key(std::uint64_t key, std::uint64_t index) noexcept -> std::uint64_t
{
    std::uint64_t s = key;
    auto a = detail::splitmix64(s);
    s = a ^ (index * 0xD1B54A32D192ED03ULL);
    return detail::splitmix64(s);
}

/// xoshiro256** generator. Cheap to seed, so every replica, generation and
/// population slot can own a stream derived from the master seed; results
/// then do not depend on how work is scheduled across threads.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t seed = 0) noexcept
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            w = detail::splitmix64(s);
        }
    }

    // Stream number `index` below `key`.
    static constexpr auto derive(std::uint64_t key, std::uint64_t index) noexcept -> Rng
    {
        return Rng { derive_key(key, index) };
    }

    static constexpr auto min() noexcept -> result_type { return 0; }
    static constexpr auto max() noexcept -> result_type { return std::numeric_limits<result_type>::max(); }

    constexpr auto operator()() noexcept -> result_type
    {
        auto const result = detail::rotl(state_[1] * 5, 7) * 9;
        auto const t = state_[1] << 17U;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
    constexpr auto uniform_index(std::uint64_t n) noexcept -> std::uint64_t
    {
        auto x = (*this)();
        auto m = static_cast<unsigned __int128>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            auto const threshold = (0 - n) % n;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<unsigned __int128>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64U);
    }

    // Uniform double in [0, 1) with 53 random bits.
    constexpr auto uniform01() noexcept -> double
    {
        return static_cast<double>((*this)() >> 11U) * 0x1.0p-53;
    }

    constexpr auto bernoulli(double p) noexcept -> bool { return uniform01() < p; }

private:
    std::array<std::uint64_t, 4> state_ {};
};

} // namespace ffgp

#endif
