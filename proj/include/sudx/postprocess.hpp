#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sudx/category.hpp"
#include "sudx/lexicon.hpp"

namespace sudx {

struct FilterVerdict {
    std::string filter_name;  // "substance", "disorder", "grounding"
    bool passed = false;
    std::string reason;
};

/// One backend answer for one (note, category, chunk), with the filter trail
/// that produced its final text. Raw answers containing the sentinel bypass
/// all filters; any filter failure replaces the answer with the sentinel.
struct CandidateAnswer {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::size_t chunk_index = 0;
    std::string raw_text;
    std::string final_text;
    std::vector<FilterVerdict> verdicts;

    bool survived() const;
};

enum class Severity { Mild, Moderate, Severe, InRemission, Unspecified };
std::string_view severity_label(Severity s);

/// The per-(note, category) answer after candidate selection.
struct FinalAnswer {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::string text;
    std::size_t candidate_count = 0;
    std::optional<Severity> severity;
    std::vector<std::string> ranked;  // operational selection only
};

/// Filter (i): the answer must contain a substance phrase of the category as
/// a word-boundary-respecting substring (after normalization).
bool filter_substance(const std::string& answer, const Lexicon& lexicon);

/// Filter (ii): some use-disorder phrase must occur after the start of some
/// substance phrase occurrence.
bool filter_disorder_phrase(const std::string& answer, const Lexicon& lexicon);

/// All maximal substrings of length >= min_len common to both inputs
/// (character-based), deduplicated, ordered by position in the answer.
/// Inputs are expected to be normalized.
std::vector<std::string> common_substrings(const std::string& note, const std::string& answer,
                                           std::size_t min_len = 5);

/// Filter (iii): some common substring of length >= min_len between the
/// normalized note and answer must itself contain a substance phrase followed
/// by a disorder phrase. Rejects generated text with no grounded diagnosis
/// mention in the note.
bool grounding_filter(const std::string& note, const std::string& answer, const Lexicon& lexicon,
                      std::size_t min_len = 5);

/// Length of the longest common substring that satisfies the grounding
/// conditions; 0 when none does.
std::size_t longest_grounded_substring(const std::string& note, const std::string& answer,
                                       const Lexicon& lexicon, std::size_t min_len = 5);

/// Runs the filter chain over the raw answers of all chunks of one
/// (note, category). raw_texts[i] belongs to chunk i.
std::vector<CandidateAnswer> apply_filters(const std::string& note_id, SUDCategory category,
                                           const std::vector<std::string>& raw_texts,
                                           const std::string& note_text, const Lexicon& lexicon,
                                           std::size_t min_len = 5);

/// Re-runs the chain on already-filtered candidates (their final texts).
std::vector<CandidateAnswer> apply_filters(const std::vector<CandidateAnswer>& candidates,
                                           const std::string& note_text, const Lexicon& lexicon,
                                           std::size_t min_len = 5);

/// Evaluation-mode selection: among surviving candidates, the one with the
/// best relaxed F1 against the gold span; ties go to the lowest chunk index.
FinalAnswer select_candidate_eval(const std::vector<CandidateAnswer>& candidates,
                                  const std::string& gold, const Lexicon& lexicon);

/// Operational selection (no gold): deduplicate identical texts, rank by
/// longest grounded common substring then earliest chunk, keep the ranked
/// list for review.
FinalAnswer select_candidate_operational(const std::vector<CandidateAnswer>& candidates,
                                         const std::string& note_text, const Lexicon& lexicon,
                                         std::size_t min_len = 5);

/// Maps the answer's severity wording onto a coarse label. Remission phrases
/// win over graded severities; among graded ones the most severe wins
/// ("mod/severe" -> severe). No phrase -> unspecified.
Severity normalize_severity(const std::string& answer, const Lexicon& lexicon);

}  // namespace sudx
