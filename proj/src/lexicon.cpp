#include "sudx/lexicon.hpp"

#include <fstream>

#include <json.hpp>

#include "sudx/errors.hpp"
#include "sudx/text.hpp"

namespace sudx {

namespace {

std::vector<std::string> lowered(std::vector<std::string> v) {
    for (auto& s : v) {
        for (auto& c : s) c = lower_ascii(c);
    }
    return v;
}

bool blank(const std::string& s) {
    for (char c : s) {
        if (!is_space_char(c)) return false;
    }
    return true;
}

}  // namespace

void validate_lexicon(const Lexicon& lex) {
    const std::string id(category_id(lex.category));
    auto check = [&](const std::vector<std::string>& phrases, const char* field) {
        if (phrases.empty()) {
            throw ValidationError("lexicon " + id + ": " + field + " is empty");
        }
        for (const auto& p : phrases) {
            if (p.empty() || blank(p)) {
                throw ValidationError("lexicon " + id + ": " + field +
                                      " contains an empty or whitespace-only phrase");
            }
        }
    };
    check(lex.substance_phrases, "substance_phrases");
    check(lex.disorder_phrases, "disorder_phrases");
    check(lex.severity_phrases, "severity_phrases");
}

LexiconSet default_lexicons() {
    // Use-disorder and severity terminology is shared across categories.
    const std::vector<std::string> disorder = {"use disorder", "use d/o", "use do",
                                               "dependence", "ud"};
    const std::vector<std::string> severity = {"mild",  "moderate",     "mod",
                                               "severe", "sever",       "in remission",
                                               "in sustained remission"};

    std::array<Lexicon, kCategoryCount> lex{};
    auto set = [&](SUDCategory c, std::vector<std::string> subs) {
        Lexicon& l = lex[static_cast<std::size_t>(c)];
        l.category = c;
        l.substance_phrases = std::move(subs);
        l.disorder_phrases = disorder;
        l.severity_phrases = severity;
    };

    set(SUDCategory::Alcohol, {"alcohol", "etoh"});
    set(SUDCategory::Opioid, {"opioid", "opiate"});
    set(SUDCategory::Cannabis, {"cannabis", "marijuana", "mj", "thc"});
    set(SUDCategory::SedativeHypnoticAnxiolytic,
        {"sedative", "hypnotic", "anxiolytic", "benzodiazepine"});
    set(SUDCategory::Cocaine, {"cocaine", "crack"});
    set(SUDCategory::Amphetamine, {"methamphetamine", "amphetamine", "meth"});
    set(SUDCategory::Caffeine, {"caffeine"});
    set(SUDCategory::Hallucinogen, {"hallucinogen", "mdma", "ecstasy"});
    set(SUDCategory::Nicotine, {"nicotine", "tobacco"});
    set(SUDCategory::Inhalant, {"inhalant", "nitrous oxide"});
    set(SUDCategory::OtherPsychoactive,
        {"other psychoactive substance", "other substance", "unknown substance",
         "polysubstance"});

    for (const auto& l : lex) validate_lexicon(l);
    return LexiconSet(lex);
}

LexiconSet load_lexicons(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open lexicon file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("lexicon file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ValidationError("lexicon file " + path + ": expected an object");

    std::array<Lexicon, kCategoryCount> lex{};
    for (SUDCategory c : all_categories()) {
        const std::string id(category_id(c));
        if (!doc.contains(id)) {
            throw ValidationError("lexicon file " + path + ": missing category " + id);
        }
        const auto& entry = doc.at(id);
        Lexicon l;
        l.category = c;
        try {
            l.substance_phrases = lowered(entry.at("substance_phrases").get<std::vector<std::string>>());
            l.disorder_phrases = lowered(entry.at("disorder_phrases").get<std::vector<std::string>>());
            l.severity_phrases = lowered(entry.at("severity_phrases").get<std::vector<std::string>>());
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("lexicon file " + path + ", category " + id + ": " + e.what());
        }
        validate_lexicon(l);
        lex[static_cast<std::size_t>(c)] = std::move(l);
    }
    return LexiconSet(lex);
}

void save_lexicons(const LexiconSet& set, const std::string& path) {
    nlohmann::json doc = nlohmann::json::object();
    for (const Lexicon& l : set.all()) {
        nlohmann::json entry;
        entry["substance_phrases"] = l.substance_phrases;
        entry["disorder_phrases"] = l.disorder_phrases;
        entry["severity_phrases"] = l.severity_phrases;
        doc[std::string(category_id(l.category))] = std::move(entry);
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write lexicon file: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace sudx
