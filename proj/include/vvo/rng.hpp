#pragma once

#include <cstdint>
#include <random>

namespace vvo {

// Deterministic RNG with portable derived distributions. std::mt19937_64 has
// a standardized output sequence; the uniform helpers below avoid the
// implementation-defined std::*_distribution mappings so that seeded runs
// reproduce bit-identically across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    int index(int n) { return static_cast<int>(below(std::uint64_t(n))); }

    std::uint64_t fork_seed() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace vvo
