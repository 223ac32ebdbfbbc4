// Compares the serial reference kernels against their OpenMP variants on a
// synthetic workload: filter chain, sample scoring and rule extraction.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sudx/batch.hpp"
#include "sudx/lexicon.hpp"
#include "sudx/rules.hpp"
#include "sudx/synth.hpp"

using namespace sudx;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms, int threads) {
    std::printf("%-28s %10.1f ms %10.1f ms   x%.2f (%d threads)\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, threads);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t note_count = 200;
    int threads = 4;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--notes") note_count = std::stoull(argv[i + 1]);
        if (flag == "--threads") threads = std::stoi(argv[i + 1]);
    }

    SynthConfig cfg;
    cfg.note_count = note_count;
    cfg.seed = 7;
    const LexiconSet lexicons = default_lexicons();
    const Corpus corpus = synthesize_corpus(cfg, lexicons);
    std::printf("corpus: %zu notes, %zu annotations, threads=%d\n\n", corpus.notes.size(),
                corpus.annotations.size(), threads);

    std::array<RuleSet, kCategoryCount> rules;
    for (SUDCategory c : all_categories()) {
        rules[static_cast<std::size_t>(c)] = compile_rules(lexicons.for_category(c));
    }

    // Rule extraction over every (note, category).
    const double rx_serial = time_best_of(3, [&] { regex_extract_batch_serial(corpus, rules); });
    const double rx_par =
        time_best_of(3, [&] { regex_extract_batch(corpus, rules, threads); });
    row("regex_extract_batch", rx_serial, rx_par, threads);

    // Filter chain over per-pair candidates (the grounding DP dominates).
    std::vector<FilterJob> jobs;
    const auto matches = regex_extract_batch_serial(corpus, rules);
    for (std::size_t ni = 0; ni < corpus.notes.size(); ++ni) {
        for (std::size_t ci = 0; ci < kCategoryCount; ++ci) {
            FilterJob j;
            j.note_id = corpus.notes[ni].note_id;
            j.category = static_cast<SUDCategory>(ci);
            j.note_text = &corpus.notes[ni].text;
            j.lexicon = &lexicons.for_category(j.category);
            for (const auto& m : matches[ni * kCategoryCount + ci]) j.raw_texts.push_back(m.text);
            if (j.raw_texts.empty()) j.raw_texts.push_back("unanswerable");
            jobs.push_back(std::move(j));
        }
    }
    const double f_serial = time_best_of(3, [&] { apply_filters_batch_serial(jobs, 5); });
    const double f_par = time_best_of(3, [&] { apply_filters_batch(jobs, 5, threads); });
    row("apply_filters_batch", f_serial, f_par, threads);

    // Scoring all (pred, gold) pairs.
    const auto filtered = apply_filters_batch_serial(jobs, 5);
    std::vector<std::string> preds(jobs.size());
    std::vector<ScoreJob> sjobs(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        preds[i] = filtered[i].empty() ? "unanswerable" : filtered[i].front().final_text;
        const auto& g = corpus.annotations[i];
        sjobs[i] = {g.note_id, g.category, &preds[i], &g.gold};
    }
    const double s_serial = time_best_of(3, [&] { score_batch_serial(sjobs); });
    const double s_par = time_best_of(3, [&] { score_batch(sjobs, threads); });
    row("score_batch", s_serial, s_par, threads);

    return 0;
}
