#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokscan/base64.hpp"
#include "tokscan/pretokenize.hpp"
#include "tokscan/unicode.hpp"

namespace tokscan {

using TokenId = uint32_t;

struct VocabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
struct StringHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const {
        return std::hash<std::string_view>{}(s);
    }
};
} // namespace detail

/// One vocabulary entry. `decoded` is present iff `bytes` is valid UTF-8,
/// which is what makes the token probeable through a text API.
struct TokenEntry {
    TokenId id = 0;
    std::string bytes;
    std::optional<std::string> decoded;

    bool probeable() const { return decoded.has_value(); }
};

/// One encoded token with the byte range it covers in the source text.
struct TokenSpan {
    TokenId id = 0;
    size_t offset = 0;
    size_t length = 0;
};

/// A rank-ordered byte-level BPE vocabulary (cl100k_base file format).
/// Immutable after load; safe for concurrent reads.
class Vocabulary {
public:
    /// Parses a vocabulary file with one `<base64 bytes> <decimal rank>` entry
    /// per line. Throws VocabError naming the offending line on bad base64,
    /// a missing or malformed rank, or a duplicate rank.
    static Vocabulary load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw VocabError("vocab: cannot open " + path);

        Vocabulary v;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;

            size_t sp = line.find(' ');
            if (sp == std::string::npos || sp + 1 >= line.size()) {
                throw VocabError("vocab: line " + std::to_string(lineno) +
                                 ": missing rank");
            }
            std::string bytes;
            try {
                bytes = base64::decode(std::string_view(line).substr(0, sp));
            } catch (const std::invalid_argument& e) {
                throw VocabError("vocab: line " + std::to_string(lineno) + ": " +
                                 e.what());
            }
            TokenId rank = 0;
            try {
                std::string rest = line.substr(sp + 1);
                if (rest.empty() || rest[0] < '0' || rest[0] > '9') {
                    throw std::invalid_argument("rank");
                }
                size_t used = 0;
                unsigned long r = std::stoul(rest, &used);
                if (used != rest.size() ||
                    r > std::numeric_limits<TokenId>::max()) {
                    throw std::invalid_argument("rank");
                }
                rank = static_cast<TokenId>(r);
            } catch (const std::exception&) {
                throw VocabError("vocab: line " + std::to_string(lineno) +
                                 ": malformed rank");
            }
            if (v.entries_.count(rank)) {
                throw VocabError("vocab: line " + std::to_string(lineno) +
                                 ": duplicate rank " + std::to_string(rank));
            }

            TokenEntry entry;
            entry.id = rank;
            entry.bytes = bytes;
            if (unicode::is_valid_utf8(bytes)) entry.decoded = bytes;
            v.encoder_.emplace(std::move(bytes), rank);
            v.entries_.emplace(rank, std::move(entry));
        }
        return v;
    }

    size_t size() const { return entries_.size(); }

    const TokenEntry& decode_token(TokenId id) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) {
            throw VocabError("vocab: unknown token id " + std::to_string(id));
        }
        return it->second;
    }

    bool contains(TokenId id) const { return entries_.count(id) != 0; }

    std::optional<TokenId> find(std::string_view bytes) const {
        auto it = encoder_.find(bytes);
        return it == encoder_.end() ? std::nullopt
                                    : std::optional<TokenId>(it->second);
    }

    /// Encodes text to token ids: pre-tokenization split, then
    /// lowest-rank-first pair merges within each piece.
    std::vector<TokenId> encode(std::string_view text) const {
        std::vector<TokenId> ids;
        for (const auto& piece : Pretokenizer::split(text)) {
            encode_piece(text.substr(piece.offset, piece.length), piece.offset,
                         ids, nullptr);
        }
        return ids;
    }

    /// Same as encode() but also reports the byte span each token covers.
    std::vector<TokenSpan> encode_with_spans(std::string_view text) const {
        std::vector<TokenId> ids;
        std::vector<TokenSpan> spans;
        for (const auto& piece : Pretokenizer::split(text)) {
            encode_piece(text.substr(piece.offset, piece.length), piece.offset,
                         ids, &spans);
        }
        return spans;
    }

    /// Concatenated bytes of a token sequence (inverse of encode()).
    std::string decode(const std::vector<TokenId>& ids) const {
        std::string out;
        for (TokenId id : ids) out += decode_token(id).bytes;
        return out;
    }

    const std::unordered_map<TokenId, TokenEntry>& entries() const {
        return entries_;
    }

    /// Checks that every multi-byte entry splits into two vocabulary entries,
    /// which by induction makes it reachable through merges. O(total bytes);
    /// meant for tests and the CLI's validate path, not for every load.
    std::vector<TokenId> unreachable_entries() const {
        std::vector<TokenId> bad;
        for (const auto& [id, entry] : entries_) {
            const std::string& b = entry.bytes;
            if (b.size() < 2) continue;
            bool ok = false;
            for (size_t i = 1; i < b.size() && !ok; ++i) {
                ok = encoder_.count(b.substr(0, i)) &&
                     encoder_.count(b.substr(i));
            }
            if (!ok) bad.push_back(id);
        }
        return bad;
    }

private:
    static constexpr TokenId kNoRank = std::numeric_limits<TokenId>::max();

    // Byte-pair merge over one pre-tokenization piece. Parts start as single
    // bytes; the adjacent pair whose concatenation has the lowest rank is
    // merged first (leftmost on equal rank) until no pair is in the
    // vocabulary. parts[k].second caches the rank of merging part k with
    // part k+1.
    void encode_piece(std::string_view piece, size_t base_offset,
                      std::vector<TokenId>& ids,
                      std::vector<TokenSpan>* spans) const {
        auto push = [&](TokenId id, size_t off, size_t len) {
            ids.push_back(id);
            if (spans) spans->push_back({id, base_offset + off, len});
        };

        if (auto whole = find(piece)) {
            push(*whole, 0, piece.size());
            return;
        }
        if (piece.size() == 1) {
            push(lookup_or_throw(piece), 0, 1);
            return;
        }

        std::vector<std::pair<size_t, TokenId>> parts;
        parts.reserve(piece.size() + 1);
        for (size_t i = 0; i < piece.size(); ++i) {
            TokenId rank = i + 1 < piece.size() ? pair_rank(piece, i, i + 2)
                                                : kNoRank;
            parts.emplace_back(i, rank);
        }
        parts.emplace_back(piece.size(), kNoRank);

        auto rank_at = [&](size_t k) {
            return k + 2 < parts.size()
                       ? pair_rank(piece, parts[k].first, parts[k + 2].first)
                       : kNoRank;
        };

        while (true) {
            size_t best = 0;
            TokenId best_rank = kNoRank;
            for (size_t k = 0; k + 1 < parts.size(); ++k) {
                if (parts[k].second < best_rank) {
                    best_rank = parts[k].second;
                    best = k;
                }
            }
            if (best_rank == kNoRank) break;
            parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(best) + 1);
            parts[best].second = rank_at(best);
            if (best > 0) parts[best - 1].second = rank_at(best - 1);
        }

        for (size_t k = 0; k + 1 < parts.size(); ++k) {
            size_t off = parts[k].first;
            size_t len = parts[k + 1].first - off;
            push(lookup_or_throw(piece.substr(off, len)), off, len);
        }
    }

    TokenId pair_rank(std::string_view piece, size_t lo, size_t hi) const {
        auto it = encoder_.find(piece.substr(lo, hi - lo));
        return it == encoder_.end() ? kNoRank : it->second;
    }

    TokenId lookup_or_throw(std::string_view bytes) const {
        auto it = encoder_.find(bytes);
        if (it == encoder_.end()) {
            throw VocabError("vocab: no entry for byte sequence of length " +
                             std::to_string(bytes.size()));
        }
        return it->second;
    }

    std::unordered_map<TokenId, TokenEntry> entries_;
    std::unordered_map<std::string, TokenId, detail::StringHash,
                       std::equal_to<>>
        encoder_;
};

} // namespace tokscan
