#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sudx/corpus.hpp"
#include "sudx/metrics.hpp"
#include "sudx/postprocess.hpp"
#include "sudx/rules.hpp"

namespace sudx {

/// Data-parallel kernels over independent (note, category) work items.
/// Each kernel has a serial reference implementation (a plain loop over the
/// per-item functions) and an OpenMP variant; outputs are written to
/// index-addressed slots, so results are identical for any thread count.
/// The *_serial forms are kept for differential testing and benchmarking.

/// The raw chunk answers of one (note, category), ready for the filter chain.
struct FilterJob {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::vector<std::string> raw_texts;
    const std::string* note_text = nullptr;
    const Lexicon* lexicon = nullptr;
};

std::vector<std::vector<CandidateAnswer>> apply_filters_batch_serial(
    const std::vector<FilterJob>& jobs, std::size_t min_len);
std::vector<std::vector<CandidateAnswer>> apply_filters_batch(const std::vector<FilterJob>& jobs,
                                                              std::size_t min_len, int threads);

/// One prediction/gold pair to score.
struct ScoreJob {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    const std::string* pred = nullptr;
    const std::string* gold = nullptr;
};

std::vector<SampleScore> score_batch_serial(const std::vector<ScoreJob>& jobs);
std::vector<SampleScore> score_batch(const std::vector<ScoreJob>& jobs, int threads);

/// Rule extraction over every (note, category) pair of the corpus. Output is
/// indexed [note_index * kCategoryCount + category].
std::vector<std::vector<RuleMatch>> regex_extract_batch_serial(
    const Corpus& corpus, const std::array<RuleSet, kCategoryCount>& rules);
std::vector<std::vector<RuleMatch>> regex_extract_batch(
    const Corpus& corpus, const std::array<RuleSet, kCategoryCount>& rules, int threads);

}  // namespace sudx
