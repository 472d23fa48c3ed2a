#pragma once
// Counter-based pseudo-random streams.
//
// Every random draw in the library comes from a Stream keyed by a 64-bit
// value derived from a user seed plus purpose tags. The generator is
// splitmix64, whose output depends only on (key, counter), so results are
// identical across platforms and independent of evaluation order.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace survood {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, used to key streams by string ids.
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_key(std::uint64_t key) noexcept { return key; }

template <class... Rest>
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag, Rest... rest) noexcept {
    return derive_key(splitmix64(key ^ splitmix64(tag)), static_cast<std::uint64_t>(rest)...);
}

// Maps 64 random bits to a double in [0, 1) with 53 bits of resolution.
constexpr double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Stream {
public:
    explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    constexpr double uniform() noexcept { return unit_interval(next()); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift; the slight bias is below 2^-64 * n.
        __extension__ using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
    }

    // Standard normal via Box-Muller. Draws two uniforms per call.
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace survood
