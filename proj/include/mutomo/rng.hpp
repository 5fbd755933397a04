#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mutomo {

// Philox4x32-10 counter-based generator. Streams are addressed by
// (seed, stream id); draws within a stream advance a block counter, so any
// event/slot gets an independent, schedule-invariant sequence.
namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    constexpr std::uint64_t kM0 = 0xD2511F53ull;
    constexpr std::uint64_t kM1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
    for (int i = 0; i < 10; ++i) philox_round(ctr, key);
    return ctr;
}

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

// Derives a well-separated stream id from a purpose tag and an index.
inline std::uint64_t stream_id(std::uint64_t tag, std::uint64_t index) {
    return detail::mix64(detail::mix64(tag) ^ index);
}

// Compile-time FNV-1a of a purpose label, for use as a stream tag.
constexpr std::uint64_t tag_of(const char* label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (; *label; ++label) {
        h ^= static_cast<unsigned char>(*label);
        h *= 0x100000001b3ull;
    }
    return h;
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = detail::philox10({base_[0], base_[1],
                                     static_cast<std::uint32_t>(block_),
                                     static_cast<std::uint32_t>(block_ >> 32)},
                                    key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal, Box-Muller with cached pair partner.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift rejection-free mapping is fine for n << 2^64.
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> base_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mutomo
