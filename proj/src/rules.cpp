#include "sudx/rules.hpp"

#include <algorithm>

#include "sudx/errors.hpp"
#include "sudx/text.hpp"

namespace sudx {

namespace {

// Literal phrase -> pattern fragment. Whitespace runs match any whitespace,
// everything else is escaped.
std::string phrase_pattern(const std::string& phrase) {
    std::string out;
    bool in_space = false;
    for (char c : phrase) {
        if (is_space_char(c)) {
            if (!in_space) out += "\\s+";
            in_space = true;
            continue;
        }
        in_space = false;
        if (is_word_char(c)) {
            out.push_back(c);
        } else {
            out.push_back('\\');
            out.push_back(c);
        }
    }
    if (out.empty()) {
        throw ValidationError("phrase \"" + phrase + "\" produces a degenerate pattern");
    }
    return out;
}

// Alternation with longer phrases first so greedy alternatives win.
std::string alternation(std::vector<std::string> phrases) {
    std::sort(phrases.begin(), phrases.end(), [](const std::string& a, const std::string& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    std::string out = "(?:";
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        if (i) out.push_back('|');
        out += phrase_pattern(phrases[i]);
    }
    out.push_back(')');
    return out;
}

std::regex compile(const std::string& src, SUDCategory category) {
    try {
        return std::regex(src, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw ValidationError("rule for " + std::string(category_id(category)) +
                              " does not compile: " + e.what());
    }
}

}  // namespace

RuleSet compile_rules(const Lexicon& lexicon) {
    validate_lexicon(lexicon);

    const std::string sub = alternation(lexicon.substance_phrases);
    const std::string dis = alternation(lexicon.disorder_phrases);
    const std::string sev = alternation(lexicon.severity_phrases);
    // Slash- or comma-joined severity chains: "mod/severe", "moderate, in remission".
    const std::string chain = sev + "(?:\\s*[/,]\\s*" + sev + ")*";

    const std::string family_a = "(?:\\b" + chain + "[\\s,:\\-]{1,3})?\\b" + sub +
                                 "\\b[^\\n]{0,40}?\\b" + dis + "\\b(?:[^\\n]{0,25}?\\b" + chain +
                                 "\\b)?";
    const std::string family_b =
        "\\b" + dis + "\\b\\s*:\\s*[^\\n]{0,15}?\\b" + sub + "\\b(?:[^\\n]{0,60}?\\b" + chain +
        "\\b)?";

    RuleSet rules;
    rules.category = lexicon.category;
    rules.pattern_sources = {family_a, family_b};
    rules.patterns.push_back(compile(family_a, lexicon.category));
    rules.patterns.push_back(compile(family_b, lexicon.category));
    // Both families require a substance phrase, so its first word doubles as
    // a containment probe (single words cannot be split by whitespace runs).
    for (const auto& p : lexicon.substance_phrases) {
        const auto space = p.find(' ');
        rules.probe_words.push_back(space == std::string::npos ? p : p.substr(0, space));
    }
    return rules;
}

RuleSet compile_literal_rules(SUDCategory category, const std::vector<std::string>& patterns) {
    if (patterns.empty()) {
        throw ValidationError("no patterns given for " + std::string(category_id(category)));
    }
    RuleSet rules;
    rules.category = category;
    for (const auto& src : patterns) {
        if (src.empty()) {
            throw ValidationError("empty pattern for " + std::string(category_id(category)));
        }
        rules.pattern_sources.push_back(src);
        rules.patterns.push_back(compile(src, category));
    }
    return rules;
}

std::vector<RuleMatch> regex_extract_text(const std::string& note_id, const std::string& text,
                                          const RuleSet& rules) {
    std::vector<RuleMatch> all;
    if (!rules.probe_words.empty()) {
        std::string low;
        low.reserve(text.size());
        for (char c : text) low.push_back(lower_ascii(c));
        bool any = false;
        for (const auto& w : rules.probe_words) {
            if (low.find(w) != std::string::npos) {
                any = true;
                break;
            }
        }
        if (!any) return all;
    }
    for (std::size_t pi = 0; pi < rules.patterns.size(); ++pi) {
        auto begin = std::sregex_iterator(text.begin(), text.end(), rules.patterns[pi]);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            RuleMatch m;
            m.note_id = note_id;
            m.category = rules.category;
            m.text = it->str();
            m.pattern_index = pi;
            m.char_start = static_cast<std::size_t>(it->position());
            m.char_end = m.char_start + m.text.size();
            all.push_back(std::move(m));
        }
    }
    // Document order; lower pattern_index wins ties, then the longer span.
    std::sort(all.begin(), all.end(), [](const RuleMatch& a, const RuleMatch& b) {
        if (a.char_start != b.char_start) return a.char_start < b.char_start;
        if (a.pattern_index != b.pattern_index) return a.pattern_index < b.pattern_index;
        return a.char_end > b.char_end;
    });
    std::vector<RuleMatch> kept;
    std::size_t covered_end = 0;
    for (auto& m : all) {
        if (m.char_start >= covered_end) {
            covered_end = m.char_end;
            kept.push_back(std::move(m));
        }
    }
    return kept;
}

std::vector<RuleMatch> regex_extract(const ClinicalNote& note, const RuleSet& rules) {
    return regex_extract_text(note.note_id, note.text, rules);
}

}  // namespace sudx
