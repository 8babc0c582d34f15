#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tokscan/unicode.hpp"

namespace tokscan {

/// Byte range of one pre-tokenization piece within the original text.
struct PieceSpan {
    size_t offset = 0;
    size_t length = 0;
};

// Scanner for the cl100k_base split pattern:
//
//   (?i:'s|'t|'re|'ve|'m|'ll|'d)
//   |[^\r\n\p{L}\p{N}]?\p{L}+
//   |\p{N}{1,3}
//   | ?[^\s\p{L}\p{N}]+[\r\n]*
//   |\s*[\r\n]+
//   |\s+(?!\S)
//   |\s+
//
// Alternatives are tried in order at each position (leftmost-first, greedy
// with backtracking), which reduces to the closed-form rules implemented
// below. The two whitespace subtleties: `\s*[\r\n]+` matches up to and
// including the last CR/LF of a whitespace run, and `\s+(?!\S)` leaves the
// final whitespace char to prefix the following word unless the run ends the
// text.
class Pretokenizer {
public:
    static std::vector<PieceSpan> split(std::string_view text) {
        std::vector<uint32_t> cps;
        std::vector<size_t> offs;
        cps.reserve(text.size());
        offs.reserve(text.size() + 1);
        size_t pos = 0;
        while (pos < text.size()) {
            offs.push_back(pos);
            cps.push_back(unicode::decode_utf8(text, pos));
        }
        offs.push_back(text.size());

        std::vector<PieceSpan> pieces;
        const size_t n = cps.size();
        size_t i = 0;
        while (i < n) {
            size_t end = match_at(cps, i);
            pieces.push_back({offs[i], offs[end] - offs[i]});
            i = end;
        }
        return pieces;
    }

private:
    static bool is_letter(uint32_t c) { return unicode::is_letter(c); }
    static bool is_number(uint32_t c) { return unicode::is_number(c); }
    static bool is_space(uint32_t c) { return unicode::is_whitespace(c); }
    static bool is_crlf(uint32_t c) { return c == '\r' || c == '\n'; }
    static bool is_symbol(uint32_t c) {
        return !is_space(c) && !is_letter(c) && !is_number(c);
    }

    // Returns the exclusive codepoint index where the piece starting at i
    // ends. Always > i: the final `\s+` alternative accepts any whitespace
    // and every non-whitespace char is accepted by the letter, number, or
    // symbol alternative.
    static size_t match_at(const std::vector<uint32_t>& cps, size_t i) {
        const size_t n = cps.size();
        uint32_t c0 = cps[i];

        // (?i:'s|'t|'re|'ve|'m|'ll|'d)
        if (c0 == '\'' && i + 1 < n) {
            switch (unicode::fold(cps[i + 1])) {
                case 's': case 't': case 'm': case 'd':
                    return i + 2;
                case 'r':
                    if (i + 2 < n && unicode::fold(cps[i + 2]) == 'e') return i + 3;
                    break;
                case 'v':
                    if (i + 2 < n && unicode::fold(cps[i + 2]) == 'e') return i + 3;
                    break;
                case 'l':
                    if (i + 2 < n && unicode::fold(cps[i + 2]) == 'l') return i + 3;
                    break;
                default:
                    break;
            }
        }

        // [^\r\n\p{L}\p{N}]?\p{L}+
        if (is_letter(c0)) {
            size_t j = i + 1;
            while (j < n && is_letter(cps[j])) ++j;
            return j;
        }
        if (!is_crlf(c0) && !is_number(c0) && i + 1 < n && is_letter(cps[i + 1])) {
            size_t j = i + 2;
            while (j < n && is_letter(cps[j])) ++j;
            return j;
        }

        // \p{N}{1,3}
        if (is_number(c0)) {
            size_t j = i + 1;
            while (j < n && j < i + 3 && is_number(cps[j])) ++j;
            return j;
        }

        //  ?[^\s\p{L}\p{N}]+[\r\n]*
        {
            size_t j = (c0 == ' ' && i + 1 < n) ? i + 1 : i;
            if (j < n && is_symbol(cps[j])) {
                ++j;
                while (j < n && is_symbol(cps[j])) ++j;
                while (j < n && is_crlf(cps[j])) ++j;
                return j;
            }
        }

        // The remaining alternatives only match whitespace.
        size_t w = i;
        while (w < n && is_space(cps[w])) ++w;

        // \s*[\r\n]+ : up to and including the last CR/LF of the run.
        for (size_t j = w; j > i; --j) {
            if (is_crlf(cps[j - 1])) return j;
        }

        // \s+(?!\S) : at end of text take the whole run, otherwise leave the
        // last whitespace char for the next piece (needs at least two).
        if (w == n) return w;
        if (w - i >= 2) return w - 1;

        // \s+
        return w;
    }
};

} // namespace tokscan
