#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gnt {

namespace detail {
/// SplitMix64 mixing step; used to derive independent substream seeds so that
/// per-node Monte Carlo draws are reproducible regardless of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic random source.  All randomness in the library flows through
/// this class: a fixed engine (mt19937_64) with our own uniform and normal
/// transformations, so that a given seed produces the same stream on every
/// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no implementation-defined state).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        cached_ = r * std::sin(two_pi * u2);
        have_cached_ = true;
        return r * std::cos(two_pi * u2);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Seed of the independent substream keyed by (seed, stream index).
    static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t state = seed;
        (void)detail::splitmix64(state);
        state ^= 0xD1B54A32D192ED03ULL * (stream + 1);
        return detail::splitmix64(state);
    }

    /// Independent substream keyed by (seed, stream index).
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(substream_seed(seed, stream));
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace gnt
