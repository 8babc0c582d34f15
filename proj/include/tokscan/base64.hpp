#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tokscan::base64 {

namespace detail {
inline constexpr std::array<int8_t, 256> decode_table = [] {
    std::array<int8_t, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 26; ++i) t['A' + i] = static_cast<int8_t>(i);
    for (int i = 0; i < 26; ++i) t['a' + i] = static_cast<int8_t>(26 + i);
    for (int i = 0; i < 10; ++i) t['0' + i] = static_cast<int8_t>(52 + i);
    t['+'] = 62;
    t['/'] = 63;
    return t;
}();

inline constexpr char encode_table[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
} // namespace detail

/// Decodes standard base64. Throws std::invalid_argument on any character
/// outside the alphabet or on stray padding.
inline std::string decode(std::string_view input) {
    std::string out;
    out.reserve(input.size() * 3 / 4);
    uint32_t buffer = 0;
    int bits = 0;
    size_t i = 0;
    for (; i < input.size() && input[i] != '='; ++i) {
        int8_t v = detail::decode_table[static_cast<uint8_t>(input[i])];
        if (v < 0) throw std::invalid_argument("base64: invalid character");
        buffer = (buffer << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
        }
    }
    for (; i < input.size(); ++i) {
        if (input[i] != '=') throw std::invalid_argument("base64: data after padding");
    }
    return out;
}

inline std::string encode(std::string_view input) {
    std::string out;
    out.reserve((input.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= input.size(); i += 3) {
        uint32_t n = (static_cast<uint8_t>(input[i]) << 16) |
                     (static_cast<uint8_t>(input[i + 1]) << 8) |
                     static_cast<uint8_t>(input[i + 2]);
        out.push_back(detail::encode_table[(n >> 18) & 63]);
        out.push_back(detail::encode_table[(n >> 12) & 63]);
        out.push_back(detail::encode_table[(n >> 6) & 63]);
        out.push_back(detail::encode_table[n & 63]);
    }
    size_t rem = input.size() - i;
    if (rem == 1) {
        uint32_t n = static_cast<uint8_t>(input[i]) << 16;
        out.push_back(detail::encode_table[(n >> 18) & 63]);
        out.push_back(detail::encode_table[(n >> 12) & 63]);
        out.append("==");
    } else if (rem == 2) {
        uint32_t n = (static_cast<uint8_t>(input[i]) << 16) |
                     (static_cast<uint8_t>(input[i + 1]) << 8);
        out.push_back(detail::encode_table[(n >> 18) & 63]);
        out.push_back(detail::encode_table[(n >> 12) & 63]);
        out.push_back(detail::encode_table[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

} // namespace tokscan::base64
