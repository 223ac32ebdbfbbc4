#include <doctest.h>

#include <string>
#include <vector>

#include "sudx/batch.hpp"
#include "sudx/synth.hpp"

using namespace sudx;

namespace {

struct Workload {
    Corpus corpus;
    LexiconSet lexicons;
    std::array<RuleSet, kCategoryCount> rules;
    std::vector<FilterJob> filter_jobs;
    std::vector<std::string> preds;
    std::vector<ScoreJob> score_jobs;

    Workload() {
        lexicons = default_lexicons();
        SynthConfig cfg;
        cfg.note_count = 30;
        cfg.seed = 17;
        cfg.prevalence.fill(0.3);
        corpus = synthesize_corpus(cfg, lexicons);
        for (SUDCategory c : all_categories()) {
            rules[static_cast<std::size_t>(c)] = compile_rules(lexicons.for_category(c));
        }
        const auto matches = regex_extract_batch_serial(corpus, rules);
        for (std::size_t ni = 0; ni < corpus.notes.size(); ++ni) {
            for (std::size_t ci = 0; ci < kCategoryCount; ++ci) {
                FilterJob j;
                j.note_id = corpus.notes[ni].note_id;
                j.category = static_cast<SUDCategory>(ci);
                j.note_text = &corpus.notes[ni].text;
                j.lexicon = &lexicons.for_category(j.category);
                for (const auto& m : matches[ni * kCategoryCount + ci]) {
                    j.raw_texts.push_back(m.text);
                }
                j.raw_texts.push_back("etoh qzx dependence");  // a candidate the filters drop
                j.raw_texts.push_back("unanswerable");
                filter_jobs.push_back(std::move(j));
            }
        }
        preds.resize(corpus.annotations.size());
        for (std::size_t i = 0; i < corpus.annotations.size(); ++i) {
            preds[i] = i % 3 == 0 ? corpus.annotations[i].gold : "something else entirely";
            score_jobs.push_back({corpus.annotations[i].note_id, corpus.annotations[i].category,
                                  &preds[i], &corpus.annotations[i].gold});
        }
    }
};

}  // namespace

TEST_CASE("parallel filter batch equals the serial reference") {
    Workload w;
    const auto serial = apply_filters_batch_serial(w.filter_jobs, 5);
    for (int threads : {2, 4, 8}) {
        const auto par = apply_filters_batch(w.filter_jobs, 5, threads);
        REQUIRE(par.size() == serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            REQUIRE(par[i].size() == serial[i].size());
            for (std::size_t k = 0; k < serial[i].size(); ++k) {
                CHECK(par[i][k].final_text == serial[i][k].final_text);
                CHECK(par[i][k].verdicts.size() == serial[i][k].verdicts.size());
            }
        }
    }
    // threads=1 routes through the reference
    const auto one = apply_filters_batch(w.filter_jobs, 5, 1);
    CHECK(one.size() == serial.size());
}

TEST_CASE("parallel score batch equals the serial reference") {
    Workload w;
    const auto serial = score_batch_serial(w.score_jobs);
    const auto par = score_batch(w.score_jobs, 4);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(par[i].strict == serial[i].strict);
        CHECK(par[i].relaxed_f1 == serial[i].relaxed_f1);
        CHECK(par[i].tp == serial[i].tp);
        CHECK(par[i].note_id == serial[i].note_id);
    }
}

TEST_CASE("parallel regex batch equals the serial reference") {
    Workload w;
    const auto serial = regex_extract_batch_serial(w.corpus, w.rules);
    const auto par = regex_extract_batch(w.corpus, w.rules, 4);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(par[i].size() == serial[i].size());
        for (std::size_t k = 0; k < serial[i].size(); ++k) {
            CHECK(par[i][k].text == serial[i][k].text);
            CHECK(par[i][k].char_start == serial[i][k].char_start);
            CHECK(par[i][k].pattern_index == serial[i][k].pattern_index);
        }
    }
}
