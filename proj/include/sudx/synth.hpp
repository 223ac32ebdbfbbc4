#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sudx/corpus.hpp"
#include "sudx/lexicon.hpp"

namespace sudx {

/// Knobs for the synthetic corpus. The length distribution is a log-normal
/// fit to the target mean/median, truncated to [min_tokens, max_tokens].
/// The seed fully determines the output.
struct SynthConfig {
    std::size_t note_count = 0;
    std::array<double, kCategoryCount> prevalence{};  // fraction of notes positive per category
    double mean_tokens = 1043.0;
    double median_tokens = 423.0;
    std::size_t min_tokens = 11;
    std::size_t max_tokens = 10719;
    std::uint64_t seed = 0;
    // Restrict positive spans to phrasings the rule families match exactly.
    bool covered_only = false;

    SynthConfig() { prevalence.fill(0.10); }
};

/// One curated diagnosis phrasing observed in clinical text. rule_covered
/// marks phrasings the generated rule families match span-exactly.
struct CuratedPhrasing {
    SUDCategory category;
    std::string_view text;
    bool rule_covered;
};

/// The fixed phrasing pool used by the generator (abbreviations, typos,
/// slashes, checklists and parenthetical noise included on purpose).
const std::vector<CuratedPhrasing>& curated_phrasings();

/// Deterministically builds notes with diagnosis sections embedding gold
/// spans, plus annotations for all 11 categories of every note (sentinel
/// where absent). Positive counts per category are quota-based, so realized
/// prevalence is within rounding of the configured fraction.
Corpus synthesize_corpus(const SynthConfig& config, const LexiconSet& lexicons);

}  // namespace sudx
