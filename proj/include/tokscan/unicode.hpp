#pragma once

#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>

#include "tokscan/unicode_data.hpp"

namespace tokscan::unicode {

inline constexpr uint32_t kReplacementChar = 0xFFFD;

namespace detail {

inline bool in_ranges(const uint32_t (*ranges)[2], size_t n, uint32_t cp) {
    size_t lo = 0, hi = n;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (cp < ranges[mid][0]) {
            hi = mid;
        } else if (cp > ranges[mid][1]) {
            lo = mid + 1;
        } else {
            return true;
        }
    }
    return false;
}

} // namespace detail

/// General category L* (letters).
inline bool is_letter(uint32_t cp) {
    return detail::in_ranges(data::kLetterRanges,
                             std::size(data::kLetterRanges), cp);
}

/// General category N* (numbers), including superscripts and fractions.
inline bool is_number(uint32_t cp) {
    return detail::in_ranges(data::kNumberRanges,
                             std::size(data::kNumberRanges), cp);
}

/// Unicode White_Space property. This is the \s class of the split pattern;
/// note it excludes U+FEFF and the C0 information separators.
inline bool is_whitespace(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

/// Simple case folding: one codepoint in, one codepoint out.
inline uint32_t fold(uint32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
    const auto& table = data::kSimpleFolds;
    size_t lo = 0, hi = std::size(table);
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (table[mid][0] < cp) {
            lo = mid + 1;
        } else if (table[mid][0] > cp) {
            hi = mid;
        } else {
            return table[mid][1];
        }
    }
    return cp;
}

/// Decodes one UTF-8 codepoint at `pos`. Returns the codepoint and advances
/// `pos` past it. Malformed sequences yield U+FFFD and advance one byte.
inline uint32_t decode_utf8(std::string_view s, size_t& pos) {
    uint8_t b0 = static_cast<uint8_t>(s[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    auto cont = [&](size_t off) {
        return pos + off < s.size() &&
               (static_cast<uint8_t>(s[pos + off]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        uint32_t cp = (b0 & 0x1Fu) << 6 | (static_cast<uint8_t>(s[pos + 1]) & 0x3Fu);
        if (cp >= 0x80) {
            pos += 2;
            return cp;
        }
    } else if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        uint32_t cp = (b0 & 0x0Fu) << 12 |
                      (static_cast<uint8_t>(s[pos + 1]) & 0x3Fu) << 6 |
                      (static_cast<uint8_t>(s[pos + 2]) & 0x3Fu);
        if (cp >= 0x800 && !(cp >= 0xD800 && cp <= 0xDFFF)) {
            pos += 3;
            return cp;
        }
    } else if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (b0 & 0x07u) << 18 |
                      (static_cast<uint8_t>(s[pos + 1]) & 0x3Fu) << 12 |
                      (static_cast<uint8_t>(s[pos + 2]) & 0x3Fu) << 6 |
                      (static_cast<uint8_t>(s[pos + 3]) & 0x3Fu);
        if (cp >= 0x10000 && cp <= 0x10FFFF) {
            pos += 4;
            return cp;
        }
    }
    ++pos;
    return kReplacementChar;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// True iff `s` decodes cleanly as UTF-8 (no overlongs, no surrogates).
inline bool is_valid_utf8(std::string_view s) {
    size_t pos = 0;
    while (pos < s.size()) {
        size_t before = pos;
        uint32_t cp = decode_utf8(s, pos);
        if (cp == kReplacementChar && pos == before + 1 &&
            static_cast<uint8_t>(s[before]) >= 0x80) {
            return false;
        }
    }
    return true;
}

} // namespace tokscan::unicode
