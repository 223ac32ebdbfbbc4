#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sudx/category.hpp"
#include "sudx/text.hpp"

namespace sudx {

struct ClinicalNote {
    std::string note_id;
    std::string patient_id;
    std::string text;
    std::optional<std::string> note_type;
    std::size_t token_count = 0;  // derived at load time

    bool operator==(const ClinicalNote&) const = default;
};

/// Ground truth for one (note, category): the annotated span text, or the
/// sentinel when the note carries no information for that category.
struct GoldAnnotation {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::string gold;

    bool is_positive() const { return !is_sentinel(gold); }
    bool operator==(const GoldAnnotation&) const = default;
};

struct Corpus {
    std::vector<ClinicalNote> notes;
    std::vector<GoldAnnotation> annotations;

    const ClinicalNote* find_note(const std::string& note_id) const;
    const GoldAnnotation* find_annotation(const std::string& note_id, SUDCategory c) const;

    bool operator==(const Corpus&) const = default;
};

/// Reads the line-delimited corpus format (one JSON record per line; see
/// write_corpus). Validates all note and annotation invariants; token counts
/// are computed with `tok`. Errors name the offending line or record.
Corpus load_corpus(const std::string& path, const Tokenizer& tok);

/// One record per line: note records first, then annotation records, both in
/// the order stored. load_corpus(write_corpus(c)) == c.
void write_corpus(const Corpus& corpus, const std::string& path);

struct CorpusStats {
    std::size_t note_count = 0;
    std::size_t min_tokens = 0;
    std::size_t max_tokens = 0;
    double mean_tokens = 0.0;
    double median_tokens = 0.0;
    // Fraction of notes with a non-sentinel annotation, per category.
    std::array<double, kCategoryCount> positive_fraction{};
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace sudx
