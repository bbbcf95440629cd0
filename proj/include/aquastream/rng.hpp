#pragma once

#include <cmath>
#include <cstdint>

namespace aquastream {

/// SplitMix64, used to expand a user seed into generator state and to derive
/// independent per-entity streams.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256** seeded via SplitMix64. Fixed algorithm (not the standard
/// library's unspecified distributions), so traces are reproducible from the
/// seed alone.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller on two fresh uniforms.
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Lognormal with the given median (= exp(mu)) and shape sigma.
    double next_lognormal(double median, double sigma) {
        if (sigma == 0.0) return median;
        return median * std::exp(sigma * next_normal());
    }

    /// Exponential with the given mean.
    double next_exponential(double mean) {
        double u = next_double();
        while (u <= 0.0) u = next_double();
        return -mean * std::log(u);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

/// Derive a child seed for an independent stream, keyed by purpose and index.
/// Measurement streams stay identical when unrelated config (e.g. the
/// attribute list) changes.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t purpose, std::uint64_t index) {
    SplitMix64 sm(root ^ (purpose * 0x9e3779b97f4a7c15ULL));
    std::uint64_t a = sm.next();
    SplitMix64 sm2(a ^ index);
    return sm2.next();
}

}  // namespace aquastream
