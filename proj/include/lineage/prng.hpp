#pragma once

#include <cstdint>

namespace lineage {

/// SplitMix64 (Steele, Lea & Flood). Every keyed or seeded stream in the
/// library is drawn from this generator so derived material is bit-exact
/// across platforms.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_{seed} {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Plain modulo reduction; the bias is
    /// below 2^-40 for every bound used here and keeps ports trivial.
    std::uint64_t next_below(std::uint64_t bound) noexcept { return next() % bound; }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Rademacher (+1/-1) signs taken from successive SplitMix64 outputs, 64
/// signs per output, least-significant bit first; a set bit is +1.
class RademacherStream {
public:
    explicit RademacherStream(SplitMix64& rng) noexcept : rng_{rng} {}

    int next() noexcept {
        if (remaining_ == 0) {
            word_ = rng_.next();
            remaining_ = 64;
        }
        const int sign = (word_ & 1ULL) ? 1 : -1;
        word_ >>= 1;
        --remaining_;
        return sign;
    }

private:
    SplitMix64& rng_;
    std::uint64_t word_ = 0;
    int remaining_ = 0;
};

}  // namespace lineage
