#pragma once

#include <cstddef>
#include <regex>
#include <string>
#include <vector>

#include "sudx/corpus.hpp"
#include "sudx/lexicon.hpp"

namespace sudx {

/// Compiled extraction rules for one category. Two pattern families are
/// generated from the lexicon, in priority order:
///   A: [severity]? substance [filler <= 40 chars] disorder-term [severity tail]?
///   B: disorder-term ":" [label filler]? substance [severity tail]?
/// Family B covers structured checklist phrasings ("use disorder: cocaine ...").
/// An escape hatch (compile_literal_rules) accepts raw pattern strings instead.
struct RuleSet {
    SUDCategory category = SUDCategory::Alcohol;
    std::vector<std::string> pattern_sources;
    std::vector<std::regex> patterns;
    // Lowercased probe words; a text containing none of them cannot match any
    // pattern, which makes the full-corpus scan cheap. Empty = always scan.
    std::vector<std::string> probe_words;
};

struct RuleMatch {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::string text;
    std::size_t pattern_index = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
};

/// Builds the two pattern families from the lexicon phrase classes.
/// Throws ValidationError for phrases that would produce a degenerate
/// (empty-matching) pattern.
RuleSet compile_rules(const Lexicon& lexicon);

/// Escape hatch: compiles user-supplied pattern strings in the given order.
RuleSet compile_literal_rules(SUDCategory category, const std::vector<std::string>& patterns);

/// Case-insensitive scan of the whole note. Non-overlapping matches in
/// document order; at equal start positions lower pattern_index wins.
std::vector<RuleMatch> regex_extract(const ClinicalNote& note, const RuleSet& rules);

/// Same scan applied to a bare string (used by the oracle backend on chunks).
std::vector<RuleMatch> regex_extract_text(const std::string& note_id, const std::string& text,
                                          const RuleSet& rules);

}  // namespace sudx
