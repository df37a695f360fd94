#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace refcmfs {

// Seeded stream with fixed transforms. std::uniform_*_distribution and
// std::normal_distribution are implementation-defined, so the variates are
// derived here from raw 64-bit engine output to keep streams stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::size_t index(std::size_t bound) {
        // Rejection sampling removes modulo bias.
        const std::uint64_t b = bound;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % b);
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace refcmfs
