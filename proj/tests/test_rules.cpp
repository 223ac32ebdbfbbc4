#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sudx/errors.hpp"
#include "sudx/lexicon.hpp"
#include "sudx/rules.hpp"
#include "sudx/synth.hpp"
#include "sudx/text.hpp"

using namespace sudx;

namespace {

const LexiconSet& lexicons() {
    static const LexiconSet set = default_lexicons();
    return set;
}

const RuleSet& rules_for(SUDCategory c) {
    static std::array<RuleSet, kCategoryCount> all = [] {
        std::array<RuleSet, kCategoryCount> r;
        for (SUDCategory c : all_categories()) {
            r[static_cast<std::size_t>(c)] = compile_rules(lexicons().for_category(c));
        }
        return r;
    }();
    return all[static_cast<std::size_t>(c)];
}

ClinicalNote note_with(const std::string& text) {
    ClinicalNote n;
    n.note_id = "n1";
    n.patient_id = "p1";
    n.text = text;
    return n;
}

std::string fixtures_dir() {
    if (const char* env = std::getenv("SUDX_DATA_DIR")) return std::string(env) + "/fixtures";
    return std::string(SUDX_SOURCE_DIR) + "/data/fixtures";
}

}  // namespace

TEST_CASE("family A matches the basic severity+substance+disorder shape") {
    const auto matches =
        regex_extract(note_with("dx: moderate caffeine use do"), rules_for(SUDCategory::Caffeine));
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].text == "moderate caffeine use do");
    CHECK(matches[0].pattern_index == 0);
    CHECK(matches[0].char_start == 4);
}

TEST_CASE("family B catches checklist phrasings") {
    const std::string text =
        "meets criteria for substance use disorder: cocaine [] mild (2-3); [] moderate (4-5); "
        "[x] severe (6 or more)";
    const auto matches = regex_extract(note_with(text), rules_for(SUDCategory::Cocaine));
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].pattern_index == 1);
    CHECK(matches[0].text == "use disorder: cocaine [] mild");
}

TEST_CASE("notes without category phrases yield no matches") {
    CHECK(regex_extract(note_with("patient stable, plan reviewed"), rules_for(SUDCategory::Alcohol))
              .empty());
}

TEST_CASE("match offsets slice the note text exactly") {
    const std::string text = "hx:\nseen today\n2. severe etoh use d/o, and follow up\nplan";
    const auto matches = regex_extract(note_with(text), rules_for(SUDCategory::Alcohol));
    REQUIRE(matches.size() == 1);
    CHECK(text.substr(matches[0].char_start, matches[0].char_end - matches[0].char_start) ==
          matches[0].text);
    CHECK(matches[0].text == "severe etoh use d/o");
}

TEST_CASE("matching is case-insensitive") {
    const auto matches =
        regex_extract(note_with("DX: Severe ETOH Use D/O"), rules_for(SUDCategory::Alcohol));
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].text == "Severe ETOH Use D/O");
}

TEST_CASE("multiple non-overlapping matches come back in document order") {
    const std::string text =
        "1. severe etoh use d/o\nnotes in between\n2. alcohol dependence, mild\n";
    const auto matches = regex_extract(note_with(text), rules_for(SUDCategory::Alcohol));
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].text == "severe etoh use d/o");
    CHECK(matches[1].text == "alcohol dependence, mild");
    CHECK(matches[0].char_end <= matches[1].char_start);
}

TEST_CASE("gap tolerance is bounded") {
    // 19 chars of parenthetical filler: fine
    auto m = regex_extract(note_with("opioid (heroin/ vicodin) use disorder"),
                           rules_for(SUDCategory::Opioid));
    CHECK(m.size() == 1);
    // 60+ chars between substance and disorder term: no match
    m = regex_extract(
        note_with("opioid mentioned early but the words continue for quite a while before any "
                  "use disorder term"),
        rules_for(SUDCategory::Opioid));
    CHECK(m.empty());
}

TEST_CASE("word boundaries keep short phrases honest") {
    CHECK(regex_extract(note_with("mudslide sentinel udder"), rules_for(SUDCategory::Cannabis))
              .empty());
    const auto m = regex_extract(note_with("dx: mj ud, moderate"), rules_for(SUDCategory::Cannabis));
    REQUIRE(m.size() == 1);
    CHECK(m[0].text == "mj ud, moderate");
}

TEST_CASE("severity lists may be empty; severity is optional in both families") {
    Lexicon lex = lexicons().for_category(SUDCategory::Alcohol);
    lex.severity_phrases = {"zz-unused-severity"};
    const RuleSet rules = compile_rules(lex);
    const auto m = regex_extract(note_with("alcohol use disorder"), rules);
    REQUIRE(m.size() == 1);
    CHECK(m[0].text == "alcohol use disorder");
}

TEST_CASE("degenerate phrases fail rule compilation") {
    Lexicon lex = lexicons().for_category(SUDCategory::Alcohol);
    lex.substance_phrases.push_back("   ");
    CHECK_THROWS_AS(compile_rules(lex), ValidationError);
    lex.substance_phrases = {""};
    CHECK_THROWS_AS(compile_rules(lex), ValidationError);
}

TEST_CASE("literal rule escape hatch") {
    const RuleSet rules =
        compile_literal_rules(SUDCategory::Alcohol, {R"(etoh\s+abuse)", R"(alcoholism)"});
    const auto m = regex_extract(note_with("longstanding ETOH abuse noted"), rules);
    REQUIRE(m.size() == 1);
    CHECK(m[0].text == "ETOH abuse");
    CHECK_THROWS_AS(compile_literal_rules(SUDCategory::Alcohol, {}), ValidationError);
    CHECK_THROWS_AS(compile_literal_rules(SUDCategory::Alcohol, {"("}), ValidationError);
}

TEST_CASE("determinism: identical note and rules give identical matches") {
    const std::string text = "1. severe etoh use d/o\n2. alcohol dependence\n";
    const auto a = regex_extract(note_with(text), rules_for(SUDCategory::Alcohol));
    const auto b = regex_extract(note_with(text), rules_for(SUDCategory::Alcohol));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].char_start == b[i].char_start);
        CHECK(a[i].pattern_index == b[i].pattern_index);
    }
}

TEST_CASE("every match carries a substance and a disorder phrase of its category") {
    SynthConfig cfg;
    cfg.note_count = 50;
    cfg.seed = 101;
    cfg.prevalence.fill(0.4);
    const Corpus corpus = synthesize_corpus(cfg, lexicons());
    std::size_t total_matches = 0;
    for (const auto& note : corpus.notes) {
        for (SUDCategory c : all_categories()) {
            const Lexicon& lex = lexicons().for_category(c);
            std::size_t prev_end = 0;
            bool first = true;
            for (const auto& m : regex_extract(note, rules_for(c))) {
                ++total_matches;
                const std::string norm = normalize_ws(m.text);
                bool has_sub = false, has_dis = false;
                for (const auto& p : lex.substance_phrases) {
                    if (!find_phrase_occurrences(norm, p).empty()) has_sub = true;
                }
                for (const auto& p : lex.disorder_phrases) {
                    if (!find_phrase_occurrences(norm, p).empty()) has_dis = true;
                }
                CAPTURE(m.text);
                CHECK(has_sub);
                CHECK(has_dis);
                // non-overlapping and sorted
                if (!first) CHECK(m.char_start >= prev_end);
                prev_end = m.char_end;
                first = false;
            }
        }
    }
    CHECK(total_matches > 100);
}

TEST_CASE("curated phrasing outcomes match the committed expectation table") {
    std::ifstream in(fixtures_dir() + "/phrasing_expectations.json");
    REQUIRE(in);
    nlohmann::json doc;
    in >> doc;
    const std::string prefix = doc.at("carrier_prefix").get<std::string>();
    const std::string suffix = doc.at("carrier_suffix").get<std::string>();

    for (const auto& c : doc.at("cases")) {
        const std::string text = c.at("text").get<std::string>();
        const auto category = category_from_id(c.at("category").get<std::string>());
        REQUIRE(category.has_value());
        const bool expect_match = c.at("match").get<bool>();

        const auto matches =
            regex_extract(note_with(prefix + text + suffix), rules_for(*category));
        CAPTURE(text);
        CAPTURE(c.at("category").get<std::string>());
        if (!expect_match) {
            CHECK(matches.empty());
            continue;
        }
        REQUIRE(matches.size() >= 1);
        CHECK(matches.size() == 1);
        CHECK(matches[0].text == c.at("span").get<std::string>());
        CHECK(matches[0].pattern_index == c.at("family").get<std::size_t>());
    }
}
