#include "sudx/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "sudx/errors.hpp"

namespace sudx {

using nlohmann::json;

const ClinicalNote* Corpus::find_note(const std::string& note_id) const {
    for (const auto& n : notes) {
        if (n.note_id == note_id) return &n;
    }
    return nullptr;
}

const GoldAnnotation* Corpus::find_annotation(const std::string& note_id, SUDCategory c) const {
    for (const auto& a : annotations) {
        if (a.category == c && a.note_id == note_id) return &a;
    }
    return nullptr;
}

Corpus load_corpus(const std::string& path, const Tokenizer& tok) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file: " + path);

    Corpus corpus;
    std::unordered_map<std::string, std::size_t> note_index;
    std::unordered_set<std::string> annotation_keys;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": malformed record: " + e.what());
        }
        const std::string kind = rec.value("record", "");
        try {
            if (kind == "note") {
                ClinicalNote n;
                n.note_id = rec.at("note_id").get<std::string>();
                n.patient_id = rec.at("patient_id").get<std::string>();
                n.text = rec.at("text").get<std::string>();
                if (rec.contains("note_type")) {
                    n.note_type = rec.at("note_type").get<std::string>();
                }
                if (n.text.empty()) {
                    throw ValidationError(path + ":" + std::to_string(line_no) +
                                          ": note " + n.note_id + " has empty text");
                }
                if (!note_index.emplace(n.note_id, corpus.notes.size()).second) {
                    throw ValidationError(path + ":" + std::to_string(line_no) +
                                          ": duplicate note_id " + n.note_id);
                }
                n.token_count = tok.count(n.text);
                corpus.notes.push_back(std::move(n));
            } else if (kind == "annotation") {
                GoldAnnotation a;
                a.note_id = rec.at("note_id").get<std::string>();
                const std::string cat = rec.at("category").get<std::string>();
                auto c = category_from_id(cat);
                if (!c) {
                    throw ValidationError(path + ":" + std::to_string(line_no) +
                                          ": unknown category " + cat);
                }
                a.category = *c;
                a.gold = rec.at("gold").get<std::string>();
                const std::string key = a.note_id + "\x1f" + cat;
                if (!annotation_keys.insert(key).second) {
                    throw ValidationError(path + ":" + std::to_string(line_no) +
                                          ": duplicate annotation for (" + a.note_id + ", " +
                                          cat + ")");
                }
                corpus.annotations.push_back(std::move(a));
            } else {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": unknown record kind \"" + kind + "\"");
            }
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }

    // Cross-record checks once everything is read, so record order is free.
    for (const auto& a : corpus.annotations) {
        auto it = note_index.find(a.note_id);
        if (it == note_index.end()) {
            throw ValidationError(path + ": annotation references unknown note_id " + a.note_id);
        }
        if (a.is_positive()) {
            const std::string note_norm = normalize_ws(corpus.notes[it->second].text);
            const std::string gold_norm = normalize_ws(a.gold);
            if (gold_norm.empty() || note_norm.find(gold_norm) == std::string::npos) {
                throw ValidationError(path + ": gold span not found in note for (" + a.note_id +
                                      ", " + std::string(category_id(a.category)) + ")");
            }
        }
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write corpus file: " + path);
    for (const auto& n : corpus.notes) {
        json rec;
        rec["record"] = "note";
        rec["note_id"] = n.note_id;
        rec["patient_id"] = n.patient_id;
        rec["text"] = n.text;
        if (n.note_type) rec["note_type"] = *n.note_type;
        out << rec.dump() << "\n";
    }
    for (const auto& a : corpus.annotations) {
        json rec;
        rec["record"] = "annotation";
        rec["note_id"] = a.note_id;
        rec["category"] = std::string(category_id(a.category));
        rec["gold"] = a.gold;
        out << rec.dump() << "\n";
    }
}

CorpusStats corpus_stats(const Corpus& corpus) {
    if (corpus.notes.empty()) throw ValidationError("corpus_stats: empty corpus");

    CorpusStats st;
    st.note_count = corpus.notes.size();
    std::vector<std::size_t> counts;
    counts.reserve(corpus.notes.size());
    double sum = 0.0;
    for (const auto& n : corpus.notes) {
        counts.push_back(n.token_count);
        sum += static_cast<double>(n.token_count);
    }
    std::sort(counts.begin(), counts.end());
    st.min_tokens = counts.front();
    st.max_tokens = counts.back();
    st.mean_tokens = sum / static_cast<double>(counts.size());
    const std::size_t m = counts.size() / 2;
    st.median_tokens = (counts.size() % 2 == 1)
                           ? static_cast<double>(counts[m])
                           : (static_cast<double>(counts[m - 1]) + static_cast<double>(counts[m])) / 2.0;

    std::array<std::size_t, kCategoryCount> positives{};
    for (const auto& a : corpus.annotations) {
        if (a.is_positive()) positives[static_cast<std::size_t>(a.category)]++;
    }
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        st.positive_fraction[i] =
            static_cast<double>(positives[i]) / static_cast<double>(st.note_count);
    }
    return st;
}

}  // namespace sudx
