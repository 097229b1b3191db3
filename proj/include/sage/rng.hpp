#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sage/errors.hpp"

namespace sage {

// Deterministic RNG wrapper. All randomness in the library flows through
// this class; the raw mt19937_64 stream is mapped to doubles and ranges by
// hand so results do not depend on the standard library's distribution
// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw ConfigError("next_below: n must be positive");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    // First k slots of a Fisher-Yates shuffle of 0..n-1. k >= n returns the
    // full shuffle.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::size_t take = k < n ? k : n;
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(take);
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace sage
