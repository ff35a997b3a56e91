#include "lineage/trait.hpp"

#include "lineage/error.hpp"

#include <algorithm>
#include <numeric>

namespace lineage {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Trait::Trait(std::vector<std::uint8_t> bits) : bits_{std::move(bits)} {
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Trait::popcount() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Trait Trait::complement() const {
    Trait out = *this;
    for (auto& b : out.bits_) b ^= 1;
    return out;
}

std::string Trait::to_hex() const {
    if (bits_.size() % 8 != 0) {
        throw InvalidArgument("trait length " + std::to_string(bits_.size()) +
                              " is not a multiple of 8");
    }
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bits_.size() / 4);
    for (std::size_t byte = 0; byte < bits_.size() / 8; ++byte) {
        unsigned v = 0;
        for (std::size_t k = 0; k < 8; ++k) v = (v << 1) | bits_[byte * 8 + k];
        out.push_back(kDigits[v >> 4]);
        out.push_back(kDigits[v & 0xF]);
    }
    return out;
}

Trait Trait::from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw FormatError("trait hex has odd length");
    Trait out(hex.size() * 4);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const int v = hex_value(hex[i]);
        if (v < 0) throw FormatError("invalid hex digit in trait: '" + std::string(1, hex[i]) + "'");
        for (int k = 0; k < 4; ++k) out.bits_[i * 4 + k] = static_cast<std::uint8_t>((v >> (3 - k)) & 1);
    }
    return out;
}

Trait Trait::from_bytes_msb(const std::uint8_t* bytes, std::size_t byte_count, std::size_t n) {
    if (n > byte_count * 8) throw InvalidArgument("not enough bytes for requested trait length");
    Trait out(n);
    for (std::size_t i = 0; i < n; ++i) out.bits_[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return out;
}

std::size_t hamming_distance(const Trait& a, const Trait& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("trait lengths differ: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a.bit(i) != b.bit(i);
    return d;
}

double agreement(const Trait& a, const Trait& b) {
    const std::size_t d = hamming_distance(a, b);
    if (a.size() == 0) throw InvalidArgument("empty traits");
    return static_cast<double>(a.size() - d) / static_cast<double>(a.size());
}

}  // namespace lineage
