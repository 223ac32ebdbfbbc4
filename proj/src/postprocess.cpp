#include "sudx/postprocess.hpp"

#include <algorithm>
#include <unordered_set>

#include "sudx/errors.hpp"
#include "sudx/metrics.hpp"
#include "sudx/text.hpp"

namespace sudx {

namespace {

const std::string kSentinelStr(kSentinel);

// All start positions of any phrase in the list, boundary-respecting.
std::vector<std::size_t> phrase_starts(const std::string& text,
                                       const std::vector<std::string>& phrases) {
    std::vector<std::size_t> starts;
    for (const auto& p : phrases) {
        for (std::size_t pos : find_phrase_occurrences(text, p)) starts.push_back(pos);
    }
    std::sort(starts.begin(), starts.end());
    return starts;
}

struct Run {
    std::size_t ans_start;
    std::size_t note_start;
    std::size_t len;
};

// Maximal match runs of length >= min_len between note and answer,
// O(|note|*|answer|) time, O(|answer|) memory.
std::vector<Run> maximal_common_runs(const std::string& note, const std::string& answer,
                                     std::size_t min_len) {
    std::vector<Run> runs;
    const std::size_t n = note.size(), m = answer.size();
    if (n == 0 || m == 0 || min_len == 0) return runs;
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (note[i] != answer[j]) {
                cur[j + 1] = 0;
                continue;
            }
            const std::size_t len = prev[j] + 1;
            cur[j + 1] = len;
            const bool right_maximal =
                (i + 1 == n) || (j + 1 == m) || (note[i + 1] != answer[j + 1]);
            if (right_maximal && len >= min_len) {
                runs.push_back({j + 1 - len, i + 1 - len, len});
            }
        }
        std::swap(prev, cur);
    }
    return runs;
}

// Occurrences of any phrase inside `text` ignoring boundaries; boundary
// feasibility is decided per enclosing substring.
struct Occurrence {
    std::size_t begin;
    std::size_t end;
};

std::vector<Occurrence> raw_occurrences(const std::string& text,
                                        const std::vector<std::string>& phrases) {
    std::vector<Occurrence> occ;
    for (const auto& p : phrases) {
        if (p.empty()) continue;
        std::size_t pos = 0;
        while ((pos = text.find(p, pos)) != std::string::npos) {
            occ.push_back({pos, pos + p.size()});
            ++pos;
        }
    }
    std::sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    return occ;
}

// Longest substring s of run text `m` such that s contains a substance
// occurrence followed by a disorder occurrence, both flanked by non-word
// characters or the edges of s, and |s| >= min_len. Returns 0 when no such
// substring exists.
std::size_t longest_qualifying_in_run(const std::string& m, const Lexicon& lexicon,
                                      std::size_t min_len) {
    const auto subs = raw_occurrences(m, lexicon.substance_phrases);
    if (subs.empty()) return 0;
    const auto diss = raw_occurrences(m, lexicon.disorder_phrases);
    if (diss.empty()) return 0;

    std::size_t best = 0;
    for (const auto& s : subs) {
        for (const auto& d : diss) {
            if (d.begin <= s.begin) continue;
            const std::size_t right = std::max(s.end, d.end);
            // Boundaries interior to every containing substring must be clean;
            // d.begin - 1 is safe because d.begin > s.begin >= 0.
            if (is_word_char(m[d.begin - 1])) continue;
            if (s.end < right && is_word_char(m[s.end])) continue;
            if (d.end < right && is_word_char(m[d.end])) continue;
            const std::size_t a_min =
                (s.begin > 0 && is_word_char(m[s.begin - 1])) ? s.begin : 0;
            const std::size_t b_max =
                (right < m.size() && !is_word_char(m[right])) ? m.size() : right;
            if (b_max - a_min >= min_len) best = std::max(best, b_max - a_min);
        }
    }
    return best;
}

}  // namespace

bool CandidateAnswer::survived() const {
    return final_text != kSentinelStr;
}

std::string_view severity_label(Severity s) {
    switch (s) {
        case Severity::Mild: return "mild";
        case Severity::Moderate: return "moderate";
        case Severity::Severe: return "severe";
        case Severity::InRemission: return "in_remission";
        case Severity::Unspecified: return "unspecified";
    }
    return "unspecified";
}

bool filter_substance(const std::string& answer, const Lexicon& lexicon) {
    const std::string norm = normalize_ws(answer);
    if (norm.empty()) return false;
    for (const auto& p : lexicon.substance_phrases) {
        if (!find_phrase_occurrences(norm, p).empty()) return true;
    }
    return false;
}

bool filter_disorder_phrase(const std::string& answer, const Lexicon& lexicon) {
    const std::string norm = normalize_ws(answer);
    const auto sub_starts = phrase_starts(norm, lexicon.substance_phrases);
    if (sub_starts.empty()) return false;
    const auto dis_starts = phrase_starts(norm, lexicon.disorder_phrases);
    for (std::size_t q : dis_starts) {
        if (q > sub_starts.front()) return true;
    }
    return false;
}

std::vector<std::string> common_substrings(const std::string& note, const std::string& answer,
                                           std::size_t min_len) {
    auto runs = maximal_common_runs(note, answer, min_len);
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
        if (a.ans_start != b.ans_start) return a.ans_start < b.ans_start;
        if (a.len != b.len) return a.len > b.len;
        return a.note_start < b.note_start;
    });
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const Run& r : runs) {
        std::string s = answer.substr(r.ans_start, r.len);
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

std::size_t longest_grounded_substring(const std::string& note, const std::string& answer,
                                       const Lexicon& lexicon, std::size_t min_len) {
    const std::string note_norm = normalize_ws(note);
    const std::string ans_norm = normalize_ws(answer);
    std::size_t best = 0;
    std::unordered_set<std::string> checked;
    for (const Run& r : maximal_common_runs(note_norm, ans_norm, min_len)) {
        std::string m = ans_norm.substr(r.ans_start, r.len);
        if (!checked.insert(m).second) continue;
        best = std::max(best, longest_qualifying_in_run(m, lexicon, min_len));
    }
    return best;
}

bool grounding_filter(const std::string& note, const std::string& answer, const Lexicon& lexicon,
                      std::size_t min_len) {
    return longest_grounded_substring(note, answer, lexicon, min_len) > 0;
}

std::vector<CandidateAnswer> apply_filters(const std::string& note_id, SUDCategory category,
                                           const std::vector<std::string>& raw_texts,
                                           const std::string& note_text, const Lexicon& lexicon,
                                           std::size_t min_len) {
    std::vector<CandidateAnswer> out;
    out.reserve(raw_texts.size());
    for (std::size_t chunk = 0; chunk < raw_texts.size(); ++chunk) {
        CandidateAnswer c;
        c.note_id = note_id;
        c.category = category;
        c.chunk_index = chunk;
        c.raw_text = raw_texts[chunk];

        if (contains_sentinel(c.raw_text)) {
            c.final_text = kSentinelStr;
            out.push_back(std::move(c));
            continue;
        }

        if (!filter_substance(c.raw_text, lexicon)) {
            c.verdicts.push_back({"substance", false, "no substance phrase of the category"});
            c.final_text = kSentinelStr;
            out.push_back(std::move(c));
            continue;
        }
        c.verdicts.push_back({"substance", true, ""});

        if (!filter_disorder_phrase(c.raw_text, lexicon)) {
            c.verdicts.push_back(
                {"disorder", false, "no use-disorder phrase after a substance phrase"});
            c.final_text = kSentinelStr;
            out.push_back(std::move(c));
            continue;
        }
        c.verdicts.push_back({"disorder", true, ""});

        if (!grounding_filter(note_text, c.raw_text, lexicon, min_len)) {
            c.verdicts.push_back({"grounding", false,
                                  "no common substring of length >= " + std::to_string(min_len) +
                                      " grounding the diagnosis in the note"});
            c.final_text = kSentinelStr;
            out.push_back(std::move(c));
            continue;
        }
        c.verdicts.push_back({"grounding", true, ""});
        c.final_text = c.raw_text;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CandidateAnswer> apply_filters(const std::vector<CandidateAnswer>& candidates,
                                           const std::string& note_text, const Lexicon& lexicon,
                                           std::size_t min_len) {
    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) texts.push_back(c.final_text);
    const std::string note_id = candidates.empty() ? std::string() : candidates.front().note_id;
    const SUDCategory cat = candidates.empty() ? lexicon.category : candidates.front().category;
    auto out = apply_filters(note_id, cat, texts, note_text, lexicon, min_len);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].chunk_index = candidates[i].chunk_index;
    return out;
}

FinalAnswer select_candidate_eval(const std::vector<CandidateAnswer>& candidates,
                                  const std::string& gold, const Lexicon& lexicon) {
    FinalAnswer ans;
    if (!candidates.empty()) {
        ans.note_id = candidates.front().note_id;
        ans.category = candidates.front().category;
    } else {
        ans.category = lexicon.category;
    }
    ans.text = kSentinelStr;

    const CandidateAnswer* best = nullptr;
    double best_f1 = -1.0;
    for (const auto& c : candidates) {
        if (!c.survived()) continue;
        ++ans.candidate_count;
        const double f1 = relaxed_scores(c.final_text, gold).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best = &c;
        }
    }
    if (best != nullptr) {
        ans.text = best->final_text;
        ans.severity = normalize_severity(ans.text, lexicon);
    }
    return ans;
}

FinalAnswer select_candidate_operational(const std::vector<CandidateAnswer>& candidates,
                                         const std::string& note_text, const Lexicon& lexicon,
                                         std::size_t min_len) {
    FinalAnswer ans;
    if (!candidates.empty()) {
        ans.note_id = candidates.front().note_id;
        ans.category = candidates.front().category;
    } else {
        ans.category = lexicon.category;
    }
    ans.text = kSentinelStr;

    struct Ranked {
        const CandidateAnswer* c;
        std::size_t grounded_len;
    };
    std::vector<Ranked> ranked;
    std::unordered_set<std::string> seen;
    for (const auto& c : candidates) {
        if (!c.survived()) continue;
        if (!seen.insert(c.final_text).second) continue;
        ranked.push_back({&c, longest_grounded_substring(note_text, c.final_text, lexicon, min_len)});
    }
    ans.candidate_count = ranked.size();
    if (ranked.empty()) return ans;

    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.grounded_len != b.grounded_len) return a.grounded_len > b.grounded_len;
        return a.c->chunk_index < b.c->chunk_index;
    });
    ans.text = ranked.front().c->final_text;
    ans.severity = normalize_severity(ans.text, lexicon);
    for (const auto& r : ranked) ans.ranked.push_back(r.c->final_text);
    return ans;
}

Severity normalize_severity(const std::string& answer, const Lexicon& lexicon) {
    const std::string norm = normalize_ws(answer);

    // Longest phrase match at each position wins ("in sustained remission"
    // over "in remission", "severe" over "sever").
    std::vector<std::pair<std::size_t, const std::string*>> hits;
    for (const auto& p : lexicon.severity_phrases) {
        for (std::size_t pos : find_phrase_occurrences(norm, p)) hits.push_back({pos, &p});
    }
    std::vector<const std::string*> winners;
    for (const auto& [pos, phrase] : hits) {
        bool shadowed = false;
        for (const auto& [pos2, phrase2] : hits) {
            if (phrase == phrase2) continue;
            if (pos2 <= pos && pos2 + phrase2->size() >= pos + phrase->size() &&
                phrase2->size() > phrase->size()) {
                shadowed = true;
                break;
            }
        }
        if (!shadowed) winners.push_back(phrase);
    }

    bool mild = false, moderate = false, severe = false, remission = false;
    for (const auto* p : winners) {
        const std::string& s = *p;
        if (s.find("remission") != std::string::npos) {
            remission = true;
        } else if (s.rfind("sever", 0) == 0) {
            severe = true;
        } else if (s.rfind("mod", 0) == 0) {
            moderate = true;
        } else if (s.rfind("mild", 0) == 0) {
            mild = true;
        }
    }
    if (remission) return Severity::InRemission;
    if (severe) return Severity::Severe;
    if (moderate) return Severity::Moderate;
    if (mild) return Severity::Mild;
    return Severity::Unspecified;
}

}  // namespace sudx
