#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lineage {

/// Fixed-length binary vector: the heritable identifier carried from parent to
/// offspring. Bit i is `bit(i)`; hex serialisation is MSB-first within each
/// byte (bit i lives in byte i/8 at position 7 - i%8).
class Trait {
public:
    Trait() = default;
    explicit Trait(std::size_t n) : bits_(n, 0) {}
    explicit Trait(std::vector<std::uint8_t> bits);

    std::size_t size() const noexcept { return bits_.size(); }
    bool bit(std::size_t i) const { return bits_.at(i) != 0; }
    void set(std::size_t i, bool value) { bits_.at(i) = value ? 1 : 0; }
    std::size_t popcount() const noexcept;

    Trait complement() const;

    /// Requires size() to be a multiple of 8.
    std::string to_hex() const;
    static Trait from_hex(std::string_view hex);

    /// First n bits of a byte string, MSB-first.
    static Trait from_bytes_msb(const std::uint8_t* bytes, std::size_t byte_count, std::size_t n);

    bool operator==(const Trait&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const Trait& a, const Trait& b);

/// (n - hamming) / n. Throws InvalidArgument on length mismatch.
double agreement(const Trait& a, const Trait& b);

}  // namespace lineage
