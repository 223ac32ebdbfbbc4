#include "sudx/batch.hpp"

namespace sudx {

std::vector<std::vector<CandidateAnswer>> apply_filters_batch_serial(
    const std::vector<FilterJob>& jobs, std::size_t min_len) {
    std::vector<std::vector<CandidateAnswer>> out(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const FilterJob& j = jobs[i];
        out[i] = apply_filters(j.note_id, j.category, j.raw_texts, *j.note_text, *j.lexicon,
                               min_len);
    }
    return out;
}

std::vector<std::vector<CandidateAnswer>> apply_filters_batch(const std::vector<FilterJob>& jobs,
                                                              std::size_t min_len, int threads) {
    if (threads <= 1) return apply_filters_batch_serial(jobs, min_len);
    std::vector<std::vector<CandidateAnswer>> out(jobs.size());
    const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        const FilterJob& j = jobs[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] =
            apply_filters(j.note_id, j.category, j.raw_texts, *j.note_text, *j.lexicon, min_len);
    }
    return out;
}

std::vector<SampleScore> score_batch_serial(const std::vector<ScoreJob>& jobs) {
    std::vector<SampleScore> out(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        out[i] = score_sample(jobs[i].note_id, jobs[i].category, *jobs[i].pred, *jobs[i].gold);
    }
    return out;
}

std::vector<SampleScore> score_batch(const std::vector<ScoreJob>& jobs, int threads) {
    if (threads <= 1) return score_batch_serial(jobs);
    std::vector<SampleScore> out(jobs.size());
    const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        const ScoreJob& j = jobs[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = score_sample(j.note_id, j.category, *j.pred, *j.gold);
    }
    return out;
}

std::vector<std::vector<RuleMatch>> regex_extract_batch_serial(
    const Corpus& corpus, const std::array<RuleSet, kCategoryCount>& rules) {
    std::vector<std::vector<RuleMatch>> out(corpus.notes.size() * kCategoryCount);
    for (std::size_t ni = 0; ni < corpus.notes.size(); ++ni) {
        for (std::size_t ci = 0; ci < kCategoryCount; ++ci) {
            out[ni * kCategoryCount + ci] = regex_extract(corpus.notes[ni], rules[ci]);
        }
    }
    return out;
}

std::vector<std::vector<RuleMatch>> regex_extract_batch(
    const Corpus& corpus, const std::array<RuleSet, kCategoryCount>& rules, int threads) {
    if (threads <= 1) return regex_extract_batch_serial(corpus, rules);
    std::vector<std::vector<RuleMatch>> out(corpus.notes.size() * kCategoryCount);
    const long total = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long k = 0; k < total; ++k) {
        const std::size_t ni = static_cast<std::size_t>(k) / kCategoryCount;
        const std::size_t ci = static_cast<std::size_t>(k) % kCategoryCount;
        out[static_cast<std::size_t>(k)] = regex_extract(corpus.notes[ni], rules[ci]);
    }
    return out;
}

}  // namespace sudx
