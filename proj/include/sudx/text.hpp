#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sudx {

inline constexpr std::string_view kSentinel = "unanswerable";

constexpr bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

constexpr char lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

constexpr bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Lowercase, collapse whitespace runs to single spaces, trim ends.
/// This is the normalization applied before any phrase/substring matching.
std::string normalize_ws(std::string_view s);

/// Scoring normalization: normalize_ws plus stripping leading/trailing
/// punctuation from each token. Tokens that end up empty are dropped.
/// Idempotent.
std::string normalize_text(std::string_view s);

/// Half-open character range of one token within the original string.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Tokenization contract used by the chunker and prompt budgeting. The default
/// splits on whitespace; a backend-specific subword tokenizer can be swapped in
/// as long as it reports character spans into the original text.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<TokenSpan> token_spans(std::string_view text) const = 0;

    std::vector<std::string> tokenize(std::string_view text) const;
    std::size_t count(std::string_view text) const { return token_spans(text).size(); }
};

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<TokenSpan> token_spans(std::string_view text) const override;
};

/// Start offsets of boundary-respecting occurrences of `phrase` in `text`.
/// An occurrence counts only when not flanked by word characters, so "ud"
/// matches in "mj ud, mod" but not inside "mud". Both inputs are expected to
/// be normalized already; matching is byte-exact.
std::vector<std::size_t> find_phrase_occurrences(std::string_view text, std::string_view phrase);

/// True when the normalized form of `s` equals the sentinel.
bool is_sentinel(std::string_view s);

/// True when `s` contains the sentinel string anywhere (case-insensitive).
bool contains_sentinel(std::string_view s);

}  // namespace sudx
