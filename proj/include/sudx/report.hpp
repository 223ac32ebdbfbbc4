#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sudx/corpus.hpp"
#include "sudx/metrics.hpp"
#include "sudx/postprocess.hpp"

namespace sudx {

/// Error composition over the positive cohort: exact matches, containments
/// (recall 1 but not strict), prefixes/fragments (precision 1 but not strict)
/// and complete misses (no token overlap).
struct ErrorBuckets {
    std::size_t exact = 0;
    std::size_t recall1_strict0 = 0;
    std::size_t precision1_strict0 = 0;
    std::size_t both_zero = 0;
};

/// Table row for one method and category: strict F1 across the three
/// cohorts, relaxed P/R/F1 for the cohort with SUD information.
struct MethodCategoryScores {
    std::optional<CohortStats> with_sud;
    std::optional<CohortStats> without_sud;
    std::optional<CohortStats> combined;
    ErrorBuckets buckets;
};

struct CategoryReport {
    SUDCategory category = SUDCategory::Alcohol;
    std::optional<MethodCategoryScores> llm;
    std::optional<MethodCategoryScores> regex;
    CandidateHistogram candidate_histogram;  // llm candidate counts > 1
    std::optional<CorrelationResult> length_correlation;
    std::string correlation_note;  // set when the correlation is undefined
};

struct Report {
    std::map<std::string, std::string> meta;
    std::vector<CategoryReport> categories;
    std::vector<SampleScore> llm_samples;
    std::vector<SampleScore> regex_samples;
};

/// Per-category histogram of candidate counts, keeping only counts > 1.
std::array<CandidateHistogram, kCategoryCount> candidate_distribution(
    const std::vector<FinalAnswer>& answers);

/// Scores the answer sets against the corpus gold and assembles every table:
/// the per-category cohort scores for each method, the error buckets, the
/// candidate-count histogram, the note-length/candidate-count correlation and
/// the method comparison. Either answer set may be absent, not both.
/// Throws ValidationError when an answer set does not cover the gold pairs
/// exactly (the message names the gaps).
Report build_report(const std::vector<FinalAnswer>* llm_answers,
                    const std::vector<FinalAnswer>* regex_answers, const Corpus& corpus,
                    std::map<std::string, std::string> meta = {}, int threads = 1);

/// Machine-readable rendering (stable field order, no volatile fields).
std::string report_to_json(const Report& report);

/// Inverse of report_to_json for the table content (per-sample scores live in
/// scores.jsonl, not in the report document).
Report report_from_json(const std::string& json_text);

/// Aligned plain-text tables.
std::string report_to_text(const Report& report);

void write_report_files(const Report& report, const std::string& dir);

}  // namespace sudx
