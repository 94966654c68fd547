#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace netobs {

// PCG32 (XSH-RR variant, O'Neill). Chosen over std::mt19937 because the
// stream is fixed by this file alone: identical output on every platform
// and standard library. All randomness in the project flows through this.
class Pcg32 {
  public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    /// Uniform integer in [0, n), n > 0. Unbiased via rejection.
    std::uint32_t next_below(std::uint32_t n) {
        std::uint32_t threshold = (~n + 1u) % n;  // 2^32 mod n
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) return r % n;
        }
    }

    /// Gaussian via Box-Muller (one value per call; spare discarded for
    /// stream simplicity).
    double normal(double mu, double sigma) {
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double mag = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * mag * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// FNV-1a, used to derive named substream seeds from the master seed.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Substream RNG: same master seed + same name => same stream, independent
/// of call order elsewhere in the program.
inline Pcg32 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Pcg32(seed ^ fnv1a64(name), 0x2545F4914F6CDD1DULL ^ (index * 0x9E3779B97F4A7C15ULL));
}

}  // namespace netobs
