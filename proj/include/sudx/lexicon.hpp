#pragma once

#include <array>
#include <string>
#include <vector>

#include "sudx/category.hpp"

namespace sudx {

/// Per-category phrase lists: substance names, use-disorder terminology and
/// severity qualifiers. All phrases are stored lowercase.
struct Lexicon {
    SUDCategory category = SUDCategory::Alcohol;
    std::vector<std::string> substance_phrases;
    std::vector<std::string> disorder_phrases;
    std::vector<std::string> severity_phrases;
};

class LexiconSet {
public:
    LexiconSet() = default;
    explicit LexiconSet(std::array<Lexicon, kCategoryCount> lex) : lexicons_(std::move(lex)) {}

    const Lexicon& for_category(SUDCategory c) const {
        return lexicons_[static_cast<std::size_t>(c)];
    }
    Lexicon& for_category(SUDCategory c) { return lexicons_[static_cast<std::size_t>(c)]; }

    const std::array<Lexicon, kCategoryCount>& all() const { return lexicons_; }

private:
    std::array<Lexicon, kCategoryCount> lexicons_{};
};

/// Built-in phrase lists reconstructed from published diagnosis phrasings.
/// Replaceable via a lexicon file; see load_lexicons.
LexiconSet default_lexicons();

/// Loads a JSON document mapping category id -> {substance_phrases,
/// disorder_phrases, severity_phrases}. Phrases are lowercased on load.
/// Throws ValidationError on missing categories, empty lists or
/// empty/whitespace-only phrases.
LexiconSet load_lexicons(const std::string& path);

/// Serializes the set in the load_lexicons format.
void save_lexicons(const LexiconSet& set, const std::string& path);

/// Enforces the Lexicon invariants; throws ValidationError naming the
/// offending category and field.
void validate_lexicon(const Lexicon& lex);

}  // namespace sudx
