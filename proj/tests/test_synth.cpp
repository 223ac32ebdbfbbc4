#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "sudx/corpus.hpp"
#include "sudx/errors.hpp"
#include "sudx/synth.hpp"

using namespace sudx;

namespace {

const LexiconSet& lexicons() {
    static const LexiconSet set = default_lexicons();
    return set;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    SynthConfig cfg;
    cfg.note_count = 40;
    cfg.seed = 42;
    const Corpus a = synthesize_corpus(cfg, lexicons());
    const Corpus b = synthesize_corpus(cfg, lexicons());
    CHECK(a == b);

    cfg.seed = 43;
    const Corpus c = synthesize_corpus(cfg, lexicons());
    CHECK(!(a == c));
}

TEST_CASE("serialized corpora from the same seed are byte-identical") {
    SynthConfig cfg;
    cfg.note_count = 25;
    cfg.seed = 42;
    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "sudx_synth_a.jsonl").string();
    const std::string p2 = (dir / "sudx_synth_b.jsonl").string();
    write_corpus(synthesize_corpus(cfg, lexicons()), p1);
    write_corpus(synthesize_corpus(cfg, lexicons()), p2);

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("every note carries all 11 annotations and valid gold spans") {
    SynthConfig cfg;
    cfg.note_count = 60;
    cfg.seed = 5;
    const Corpus c = synthesize_corpus(cfg, lexicons());
    REQUIRE(c.notes.size() == 60);
    REQUIRE(c.annotations.size() == 60 * kCategoryCount);

    // loader revalidates: gold spans occur in the note, ids are unique
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "sudx_synth_check.jsonl").string();
    write_corpus(c, path);
    WhitespaceTokenizer tok;
    CHECK_NOTHROW(load_corpus(path, tok));
    std::filesystem::remove(path);
}

TEST_CASE("zero prevalence means every gold is the sentinel") {
    SynthConfig cfg;
    cfg.note_count = 30;
    cfg.seed = 11;
    cfg.prevalence.fill(0.0);
    const Corpus c = synthesize_corpus(cfg, lexicons());
    for (const auto& a : c.annotations) CHECK(a.gold == "unanswerable");
}

TEST_CASE("quota assignment keeps realized prevalence within rounding") {
    SynthConfig cfg;
    cfg.note_count = 500;
    cfg.seed = 3;
    cfg.prevalence.fill(0.10);
    cfg.prevalence[static_cast<std::size_t>(SUDCategory::Alcohol)] = 0.33;
    cfg.prevalence[static_cast<std::size_t>(SUDCategory::Caffeine)] = 0.03;
    const Corpus c = synthesize_corpus(cfg, lexicons());
    const CorpusStats st = corpus_stats(c);
    CHECK(std::abs(st.positive_fraction[static_cast<std::size_t>(SUDCategory::Alcohol)] - 0.33) <
          0.02);
    CHECK(std::abs(st.positive_fraction[static_cast<std::size_t>(SUDCategory::Caffeine)] - 0.03) <
          0.02);
    CHECK(std::abs(st.positive_fraction[static_cast<std::size_t>(SUDCategory::Cannabis)] - 0.10) <
          0.02);
}

TEST_CASE("note lengths respect the truncation bounds") {
    SynthConfig cfg;
    cfg.note_count = 300;
    cfg.seed = 9;
    const Corpus c = synthesize_corpus(cfg, lexicons());
    const CorpusStats st = corpus_stats(c);
    CHECK(st.min_tokens >= 11);
    CHECK(st.max_tokens <= 10719);
    // skewed: mean should exceed the median noticeably
    CHECK(st.mean_tokens > st.median_tokens);
}

TEST_CASE("curated phrasings show up verbatim when their category is positive") {
    SynthConfig cfg;
    cfg.note_count = 120;
    cfg.seed = 21;
    cfg.prevalence.fill(0.0);
    cfg.prevalence[static_cast<std::size_t>(SUDCategory::Caffeine)] = 1.0;
    const Corpus c = synthesize_corpus(cfg, lexicons());
    bool saw_curated = false;
    for (const auto& a : c.annotations) {
        if (a.category != SUDCategory::Caffeine) continue;
        REQUIRE(a.is_positive());
        if (a.gold == "moderate caffeine use do") {
            saw_curated = true;
            const ClinicalNote* n = c.find_note(a.note_id);
            REQUIRE(n != nullptr);
            CHECK(n->text.find("moderate caffeine use do") != std::string::npos);
        }
    }
    CHECK(saw_curated);
}

TEST_CASE("covered-only corpora avoid phrasings the rules cannot reproduce") {
    SynthConfig cfg;
    cfg.note_count = 200;
    cfg.seed = 33;
    cfg.covered_only = true;
    cfg.prevalence.fill(0.3);
    const Corpus c = synthesize_corpus(cfg, lexicons());
    for (const auto& a : c.annotations) {
        if (!a.is_positive()) continue;
        for (const auto& ph : curated_phrasings()) {
            if (!ph.rule_covered) CHECK(a.gold != std::string(ph.text));
        }
    }
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.note_count = 0;
    CHECK_THROWS_AS(synthesize_corpus(cfg, lexicons()), ValidationError);
    cfg.note_count = 10;
    cfg.prevalence[0] = 1.5;
    CHECK_THROWS_AS(synthesize_corpus(cfg, lexicons()), ValidationError);
    cfg.prevalence[0] = -0.1;
    CHECK_THROWS_AS(synthesize_corpus(cfg, lexicons()), ValidationError);
}

TEST_CASE("the curated pool covers all the documented phrasing variety") {
    const auto& pool = curated_phrasings();
    CHECK(pool.size() == 13);
    int covered = 0;
    for (const auto& ph : pool) {
        if (ph.rule_covered) ++covered;
    }
    CHECK(covered == 4);
}
