#pragma once

#include <cmath>
#include <cstdint>

namespace hodse {

/// SplitMix64 — tiny public-domain mixer; used both as a seeding hash and as
/// the stream-derivation function for replication substreams.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) noexcept : state(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ — public-domain 64-bit generator.  State is derived from a
/// (master seed, stream index) pair via SplitMix64, which makes streams
/// splittable by counter: stream r is a pure function of (seed, r), so the
/// same replication always sees the same draws no matter how work is divided
/// across threads.
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream) noexcept {
        SplitMix64 sm(master_seed ^ (0xA3EC647659359ACDULL * (stream + 1)));
        for (auto& word : s_) word = sm.next();
        has_cached_normal_ = false;
        // A few warm-up rounds decorrelate nearby streams.
        for (int i = 0; i < 8; ++i) (void)next_u64();
    }

    explicit Rng(std::uint64_t master_seed) noexcept : Rng(master_seed, 0) {}

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0,1] (never exactly 0, so log() is safe).
    double uniform01() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform double in [a,b].
    double uniform(double a, double b) noexcept {
        return a + (b - a) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
    }

    /// Standard normal via Box-Muller.  Implemented directly (not via
    /// std::normal_distribution) so the draw sequence is a fixed function of
    /// the stream regardless of standard-library version.
    double normal() noexcept {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        has_cached_normal_ = true;
        return r * std::cos(a);
    }

    /// +1 or -1 with equal probability.
    double rademacher() noexcept {
        return (next_u64() & 1ULL) ? 1.0 : -1.0;
    }

    /// Student-t with integer df >= 1, via a normal over an independent chi.
    double student_t(int df) noexcept {
        double chi2 = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            chi2 += z * z;
        }
        return normal() / std::sqrt(chi2 / static_cast<double>(df));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace hodse
