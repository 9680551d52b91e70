#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace cvqkd {

/// Counter-based deterministic PRNG (SplitMix64 stream).
///
/// Every consumer derives its own stream from a 64-bit master seed and a
/// stream id, so independent pipeline stages never share state and results
/// are reproducible bit-for-bit across runs and platforms.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

    std::uint64_t next_u64() {
        return mix(base_ + 0x9E3779B97F4A7C15ULL * (++counter_));
    }

    /// Uniform double in (0, 1].
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method (pairs are cached).
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double k = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * k;
        has_cached_ = true;
        return u * k;
    }

    void fill_normal(std::span<double> out) {
        for (double& x : out) x = next_normal();
    }

    /// Chi-square draw with n degrees of freedom (sum of squared normals).
    double next_chi_square(int n) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = next_normal();
            s += z * z;
        }
        return s;
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Derives the seed for the i-th independent sub-task of a batch.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return CounterRng::mix(master ^ CounterRng::mix(index + 1));
}

} // namespace cvqkd
