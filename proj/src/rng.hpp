#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace dedup {

// splitmix64, used for seed derivation and fingerprint synthesis.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
    uint64_t s = base ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Deterministic RNG wrapper. std::mt19937_64 output is fully specified by the
// standard; the std distributions are not, so we roll our own on top of it.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, n)
    uint64_t uniform(uint64_t n) {
        assert(n > 0);
        // rejection sampling to avoid modulo bias
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    // uniform in [lo, hi] inclusive
    uint64_t uniform_range(uint64_t lo, uint64_t hi) {
        assert(hi >= lo);
        return lo + uniform(hi - lo + 1);
    }

    // uniform real in [0, 1)
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // uniform real in [0, x)
    double uniform_real(double x) { return uniform01() * x; }

    bool bernoulli(double p) { return uniform01() < p; }

    // geometric on {1, 2, 3, ...} with P(k) = p * (1-p)^(k-1)
    uint64_t geometric(double p) {
        assert(p > 0.0 && p <= 1.0);
        if (p >= 1.0) return 1;
        double u = uniform01();
        // inverse CDF; u == 0 maps to 1
        double k = std::floor(std::log1p(-u) / std::log1p(-p)) + 1.0;
        if (k < 1.0) k = 1.0;
        return static_cast<uint64_t>(k);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace dedup
