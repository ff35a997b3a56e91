#pragma once

#include "lineage/error.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace lineage {

/// 16 lowercase hex digits.
inline std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = kDigits[v & 0xF];
    return out;
}

/// Accepts 1-16 hex digits with an optional 0x prefix.
inline std::uint64_t parse_hex64(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
    if (text.empty() || text.size() > 16) throw FormatError("expected 1-16 hex digits, got '" + std::string(text) + "'");
    std::uint64_t v = 0;
    for (char c : text) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw FormatError("invalid hex digit '" + std::string(1, c) + "'");
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

}  // namespace lineage
