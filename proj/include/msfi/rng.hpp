#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace msfi {

/// philox4x32-10 counter-based generator.
///
/// A generator is a pure function of (key, stream, counter): the same triple
/// always yields the same draw sequence, independent of what other streams
/// do. Streams are cheap, so every replicate (and every Poisson point) gets
/// its own.
class Philox {
public:
    explicit Philox(std::uint64_t key, std::uint64_t stream = 0)
        : key0_(static_cast<std::uint32_t>(key)),
          key1_(static_cast<std::uint32_t>(key >> 32)),
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    /// Raw 4x32 block for counter value `ctr` (does not advance the stream).
    std::array<std::uint32_t, 4> block(std::uint64_t ctr) const {
        std::uint32_t c0 = static_cast<std::uint32_t>(ctr);
        std::uint32_t c1 = static_cast<std::uint32_t>(ctr >> 32);
        std::uint32_t c2 = stream_lo_;
        std::uint32_t c3 = stream_hi_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            std::uint64_t p0 = 0xD2511F53ull * c0;
            std::uint64_t p1 = 0xCD9E8D57ull * c2;
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
        }
        return {c0, c1, c2, c3};
    }

    std::uint64_t next_u64() {
        if (!have_half_) {
            auto b = block(counter_++);
            std::uint64_t lo = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
            half_ = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
            have_half_ = true;
            return lo;
        }
        have_half_ = false;
        return half_;
    }

    /// Uniform on [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log argument.
    double next_double_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (second value cached).
    double next_normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        double u1 = next_double_pos();
        double u2 = next_double();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        cached_normal_ = radius * std::sin(angle);
        have_normal_ = true;
        return radius * std::cos(angle);
    }

    /// Exponential with unit rate.
    double next_exponential() { return -std::log(next_double_pos()); }

private:
    std::uint32_t key0_;
    std::uint32_t key1_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t counter_ = 0;
    std::uint64_t half_ = 0;
    bool have_half_ = false;
    bool have_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace msfi
