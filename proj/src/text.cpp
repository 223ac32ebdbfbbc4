#include "sudx/text.hpp"

#include <cctype>

namespace sudx {

std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space_char(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(lower_ascii(c));
    }
    return out;
}

namespace {

bool is_punct_ascii(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string normalize_text(std::string_view s) {
    std::string ws = normalize_ws(s);
    std::string out;
    out.reserve(ws.size());
    std::size_t i = 0;
    while (i < ws.size()) {
        std::size_t j = ws.find(' ', i);
        if (j == std::string::npos) j = ws.size();
        std::size_t b = i, e = j;
        while (b < e && is_punct_ascii(ws[b])) ++b;
        while (e > b && is_punct_ascii(ws[e - 1])) --e;
        if (b < e) {
            if (!out.empty()) out.push_back(' ');
            out.append(ws, b, e - b);
        }
        i = j + 1;
    }
    return out;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (const TokenSpan& t : token_spans(text)) {
        out.emplace_back(text.substr(t.begin, t.end - t.begin));
    }
    return out;
}

std::vector<TokenSpan> WhitespaceTokenizer::token_spans(std::string_view text) const {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space_char(text[i])) ++i;
        if (i >= n) break;
        std::size_t b = i;
        while (i < n && !is_space_char(text[i])) ++i;
        spans.push_back({b, i});
    }
    return spans;
}

std::vector<std::size_t> find_phrase_occurrences(std::string_view text, std::string_view phrase) {
    std::vector<std::size_t> hits;
    if (phrase.empty() || phrase.size() > text.size()) return hits;
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t end = pos + phrase.size();
        const bool right_ok = end == text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) hits.push_back(pos);
        ++pos;
    }
    return hits;
}

bool is_sentinel(std::string_view s) {
    return normalize_text(s) == kSentinel;
}

bool contains_sentinel(std::string_view s) {
    std::string low;
    low.reserve(s.size());
    for (char c : s) low.push_back(lower_ascii(c));
    return low.find(kSentinel) != std::string::npos;
}

}  // namespace sudx
