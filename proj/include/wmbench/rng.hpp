#pragma once

#include <cmath>
#include <cstdint>

namespace wmb {

// All randomness in the toolkit flows through this generator so that runs
// are bit-reproducible across platforms. std::mt19937 plus the standard
// distributions would not be: libstdc++ and libc++ disagree on
// normal_distribution. The algorithms are pinned here instead:
//
//   state seeding   splitmix64 (Steele et al.)
//   stream          xoshiro256++ (Blackman & Vigna)
//   uniform [0,1)   53-bit mantissa fill
//   gaussian        Box-Muller on (0,1] x [0,1)
//
// derive_seed() gives substreams a fixed counter-mixing rule, so adding a
// consumer never perturbs the draws of existing ones.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
    return splitmix64(x);
}

// Substream i of a root seed. Fixed mixing, not sequential splitting.
inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t s = root;
    uint64_t a = splitmix64(s);
    uint64_t t = stream + 0x9E3779B97F4A7C15ULL;
    return a ^ splitmix64(t);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        have_spare_ = false;
        spare_ = 0.0;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53 random mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1. Rejection keeps it unbiased.
    uint64_t next_below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool next_bool() { return (next_u64() >> 63) != 0; }

    // Chip/carrier sign in {-1, +1}.
    double next_sign() { return next_bool() ? 1.0 : -1.0; }

    // Standard normal via Box-Muller; second value cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double();  // (0,1], log stays finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace wmb
