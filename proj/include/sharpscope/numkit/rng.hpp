#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace sharpscope::numkit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Deterministic counter-tracked generator (xoshiro256++ core, splitmix64 seeding).
/// The draw sequence depends only on the seed, never on platform or thread count.
/// A generator is owned by exactly one caller; parallel work derives child streams.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    /// Number of raw 64-bit words consumed so far.
    std::uint64_t position() const noexcept { return position_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        ++position_;
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive. Rejection sampling, no modulo bias.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller; generates pairs, second value is cached.
    double normal() noexcept {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(angle);
        has_cached_ = true;
        return r * std::cos(angle);
    }

    /// Independent child stream; derivation folds the label into the parent seed.
    SeededRng derive(std::uint64_t label) const noexcept {
        std::uint64_t sm = seed_;
        const std::uint64_t a = detail::splitmix64(sm);
        sm = label ^ 0x5851f42d4c957f2dULL;
        const std::uint64_t b = detail::splitmix64(sm);
        return SeededRng(a ^ detail::rotl(b, 31));
    }

    SeededRng derive(std::string_view label) const noexcept {
        return derive(detail::fnv1a(label));
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4]{};
    std::uint64_t position_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace sharpscope::numkit
