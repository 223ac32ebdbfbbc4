#include "sudx/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "sudx/batch.hpp"
#include "sudx/errors.hpp"

namespace sudx {

using nlohmann::json;

namespace {

std::string pair_key(const std::string& note_id, SUDCategory c) {
    return note_id + "\x1f" + std::string(category_id(c));
}

// Index answers by (note, category) and verify exact coverage of the gold set.
std::unordered_map<std::string, const FinalAnswer*> index_answers(
    const std::vector<FinalAnswer>& answers, const Corpus& corpus, const std::string& method) {
    std::unordered_map<std::string, const FinalAnswer*> idx;
    idx.reserve(answers.size());
    for (const auto& a : answers) {
        if (!idx.emplace(pair_key(a.note_id, a.category), &a).second) {
            throw ValidationError(method + " answers: duplicate answer for (" + a.note_id + ", " +
                                  std::string(category_id(a.category)) + ")");
        }
    }
    std::vector<std::string> missing;
    for (const auto& g : corpus.annotations) {
        if (idx.find(pair_key(g.note_id, g.category)) == idx.end()) {
            missing.push_back("(" + g.note_id + ", " + std::string(category_id(g.category)) + ")");
        }
    }
    if (!missing.empty()) {
        std::string msg = method + " answers: missing " + std::to_string(missing.size()) +
                          " (note, category) pair(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += " ...";
        throw ValidationError(msg);
    }
    if (idx.size() != corpus.annotations.size()) {
        throw ValidationError(method + " answers: " + std::to_string(idx.size()) +
                              " answers do not match " + std::to_string(corpus.annotations.size()) +
                              " gold pairs (extraneous answers present)");
    }
    return idx;
}

struct MethodData {
    std::vector<SampleScore> samples;  // aligned with corpus.annotations
};

MethodData score_method(const std::vector<FinalAnswer>& answers, const Corpus& corpus,
                        const std::string& method, int threads) {
    auto idx = index_answers(answers, corpus, method);
    std::vector<ScoreJob> jobs;
    jobs.reserve(corpus.annotations.size());
    for (const auto& g : corpus.annotations) {
        const FinalAnswer* a = idx.at(pair_key(g.note_id, g.category));
        jobs.push_back({g.note_id, g.category, &a->text, &g.gold});
    }
    MethodData d;
    d.samples = score_batch(jobs, threads);
    return d;
}

MethodCategoryScores summarize(const std::vector<SampleScore>& samples,
                               const std::vector<bool>& is_positive,
                               const std::vector<std::size_t>& sample_indices) {
    std::vector<SampleScore> with, without, combined;
    for (std::size_t i : sample_indices) {
        combined.push_back(samples[i]);
        if (is_positive[i]) {
            with.push_back(samples[i]);
        } else {
            without.push_back(samples[i]);
        }
    }
    MethodCategoryScores out;
    out.with_sud = macro_average(with);
    out.without_sud = macro_average(without);
    out.combined = macro_average(combined);
    for (const auto& s : with) {
        const bool strict = s.strict == 1;
        if (strict) out.buckets.exact++;
        if (!strict && s.relaxed_recall == 1.0) out.buckets.recall1_strict0++;
        if (!strict && s.relaxed_precision == 1.0) out.buckets.precision1_strict0++;
        if (s.relaxed_recall == 0.0 && s.relaxed_precision == 0.0) out.buckets.both_zero++;
    }
    return out;
}

double pct(double v) {
    return std::round(v * 10000.0) / 100.0;
}

json cohort_json(const std::optional<CohortStats>& c, bool relaxed) {
    if (!c) return nullptr;
    json j;
    j["n"] = c->n;
    j["strict_f1"] = pct(c->strict_f1);
    if (relaxed) {
        j["relaxed_precision"] = pct(c->relaxed_precision);
        j["relaxed_recall"] = pct(c->relaxed_recall);
        j["relaxed_f1"] = pct(c->relaxed_f1);
    }
    return j;
}

json method_json(const std::optional<MethodCategoryScores>& m) {
    if (!m) return nullptr;
    json j;
    j["with_sud"] = cohort_json(m->with_sud, true);
    j["without_sud"] = cohort_json(m->without_sud, false);
    j["combined"] = cohort_json(m->combined, false);
    json b;
    b["exact"] = m->buckets.exact;
    b["recall1_strict0"] = m->buckets.recall1_strict0;
    b["precision1_strict0"] = m->buckets.precision1_strict0;
    b["no_overlap"] = m->buckets.both_zero;
    j["error_buckets"] = b;
    return j;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_cell(const std::optional<CohortStats>& c, double CohortStats::*field) {
    if (!c) return "-";
    return fmt2(pct((*c).*field));
}

}  // namespace

std::array<CandidateHistogram, kCategoryCount> candidate_distribution(
    const std::vector<FinalAnswer>& answers) {
    std::array<CandidateHistogram, kCategoryCount> out{};
    for (const auto& a : answers) {
        if (a.candidate_count > 1) {
            out[static_cast<std::size_t>(a.category)][a.candidate_count]++;
        }
    }
    return out;
}

Report build_report(const std::vector<FinalAnswer>* llm_answers,
                    const std::vector<FinalAnswer>* regex_answers, const Corpus& corpus,
                    std::map<std::string, std::string> meta, int threads) {
    if (llm_answers == nullptr && regex_answers == nullptr) {
        throw ValidationError("build_report: no answer sets given");
    }

    Report report;
    report.meta = std::move(meta);
    report.meta.emplace("strict_match", "exact string equality after normalization (lowercase, "
                                        "whitespace collapse, token-edge punctuation stripped)");

    std::optional<MethodData> llm, regex;
    if (llm_answers) llm = score_method(*llm_answers, corpus, "llm", threads);
    if (regex_answers) regex = score_method(*regex_answers, corpus, "regex", threads);

    // Row lookup per category, aligned with corpus.annotations.
    std::vector<bool> is_positive(corpus.annotations.size());
    std::array<std::vector<std::size_t>, kCategoryCount> per_category;
    for (std::size_t i = 0; i < corpus.annotations.size(); ++i) {
        is_positive[i] = corpus.annotations[i].is_positive();
        per_category[static_cast<std::size_t>(corpus.annotations[i].category)].push_back(i);
    }

    std::unordered_map<std::string, const FinalAnswer*> llm_idx;
    if (llm_answers) {
        for (const auto& a : *llm_answers) llm_idx[pair_key(a.note_id, a.category)] = &a;
    }
    std::unordered_map<std::string, std::size_t> note_tokens;
    for (const auto& n : corpus.notes) note_tokens[n.note_id] = n.token_count;

    std::array<CandidateHistogram, kCategoryCount> histograms{};
    if (llm_answers) histograms = candidate_distribution(*llm_answers);

    for (SUDCategory c : all_categories()) {
        const std::size_t ci = static_cast<std::size_t>(c);
        CategoryReport cr;
        cr.category = c;
        if (llm) cr.llm = summarize(llm->samples, is_positive, per_category[ci]);
        if (regex) cr.regex = summarize(regex->samples, is_positive, per_category[ci]);

        if (llm_answers) {
            cr.candidate_histogram = histograms[ci];
            std::vector<double> lengths, counts;
            for (std::size_t i : per_category[ci]) {
                const auto& g = corpus.annotations[i];
                const FinalAnswer* a = llm_idx.at(pair_key(g.note_id, g.category));
                lengths.push_back(static_cast<double>(note_tokens.at(g.note_id)));
                counts.push_back(static_cast<double>(a->candidate_count));
            }
            try {
                cr.length_correlation = pearson(lengths, counts);
            } catch (const ValidationError& e) {
                cr.correlation_note = e.what();
            }
        }
        report.categories.push_back(std::move(cr));
    }

    if (llm) report.llm_samples = std::move(llm->samples);
    if (regex) report.regex_samples = std::move(regex->samples);
    return report;
}

std::string report_to_json(const Report& report) {
    json doc;
    doc["meta"] = report.meta;

    json cats = json::array();
    for (const auto& cr : report.categories) {
        json c;
        c["category"] = std::string(category_id(cr.category));
        c["llm"] = method_json(cr.llm);
        c["regex"] = method_json(cr.regex);
        json hist = json::object();
        for (const auto& [count, freq] : cr.candidate_histogram) {
            hist[std::to_string(count)] = freq;
        }
        c["candidate_histogram"] = hist;
        if (cr.length_correlation) {
            json p;
            p["r"] = cr.length_correlation->r;
            p["p_value"] = cr.length_correlation->p_value;
            p["n"] = cr.length_correlation->n;
            p["stars"] = cr.length_correlation->stars;
            c["length_correlation"] = p;
        } else {
            c["length_correlation"] = nullptr;
            if (!cr.correlation_note.empty()) c["correlation_note"] = cr.correlation_note;
        }
        if (cr.llm && cr.regex) {
            json cmp;
            cmp["llm_strict_f1_with_sud"] = cohort_json(cr.llm->with_sud, false);
            cmp["regex_strict_f1_with_sud"] = cohort_json(cr.regex->with_sud, false);
            c["comparison"] = cmp;
        }
        cats.push_back(std::move(c));
    }
    doc["categories"] = cats;
    return doc.dump(2) + "\n";
}

Report report_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("report document does not parse: ") + e.what());
    }
    Report report;
    const json meta = doc.value("meta", json::object());
    for (const auto& [k, v] : meta.items()) {
        report.meta[k] = v.get<std::string>();
    }

    auto cohort_from = [](const json& j, bool relaxed) -> std::optional<CohortStats> {
        if (j.is_null()) return std::nullopt;
        CohortStats c;
        c.n = j.at("n").get<std::size_t>();
        c.strict_f1 = j.at("strict_f1").get<double>() / 100.0;
        if (relaxed && j.contains("relaxed_f1")) {
            c.relaxed_precision = j.at("relaxed_precision").get<double>() / 100.0;
            c.relaxed_recall = j.at("relaxed_recall").get<double>() / 100.0;
            c.relaxed_f1 = j.at("relaxed_f1").get<double>() / 100.0;
        }
        return c;
    };
    auto method_from = [&](const json& j) -> std::optional<MethodCategoryScores> {
        if (j.is_null()) return std::nullopt;
        MethodCategoryScores m;
        m.with_sud = cohort_from(j.at("with_sud"), true);
        m.without_sud = cohort_from(j.at("without_sud"), false);
        m.combined = cohort_from(j.at("combined"), false);
        const json& b = j.at("error_buckets");
        m.buckets.exact = b.at("exact").get<std::size_t>();
        m.buckets.recall1_strict0 = b.at("recall1_strict0").get<std::size_t>();
        m.buckets.precision1_strict0 = b.at("precision1_strict0").get<std::size_t>();
        m.buckets.both_zero = b.at("no_overlap").get<std::size_t>();
        return m;
    };

    for (const auto& c : doc.at("categories")) {
        CategoryReport cr;
        const auto cat = category_from_id(c.at("category").get<std::string>());
        if (!cat) throw ValidationError("report document names an unknown category");
        cr.category = *cat;
        cr.llm = method_from(c.at("llm"));
        cr.regex = method_from(c.at("regex"));
        for (const auto& [count, freq] : c.at("candidate_histogram").items()) {
            cr.candidate_histogram[std::stoull(count)] = freq.get<std::size_t>();
        }
        if (!c.at("length_correlation").is_null()) {
            const json& p = c.at("length_correlation");
            CorrelationResult r;
            r.r = p.at("r").get<double>();
            r.p_value = p.at("p_value").get<double>();
            r.n = p.at("n").get<std::size_t>();
            r.stars = p.at("stars").get<std::string>();
            cr.length_correlation = r;
        } else {
            cr.correlation_note = c.value("correlation_note", "no correlation computed");
        }
        report.categories.push_back(std::move(cr));
    }
    return report;
}

std::string report_to_text(const Report& report) {
    std::ostringstream out;
    bool has_llm = false, has_regex = false;
    for (const auto& cr : report.categories) {
        has_llm = has_llm || cr.llm.has_value();
        has_regex = has_regex || cr.regex.has_value();
    }

    auto category_table = [&](const char* title, bool llm_side) {
        out << title << "\n";
        out << "  " << std::left << std::setw(30) << "category" << std::right << std::setw(8)
            << "n(with)" << std::setw(12) << "F1(strict)" << std::setw(12) << "F1(relax)"
            << std::setw(12) << "R(relax)" << std::setw(12) << "P(relax)" << std::setw(12)
            << "F1(w/o)" << std::setw(12) << "F1(comb)" << "\n";
        for (const auto& cr : report.categories) {
            const auto& m = llm_side ? cr.llm : cr.regex;
            if (!m) continue;
            out << "  " << std::left << std::setw(30) << std::string(category_id(cr.category))
                << std::right << std::setw(8) << (m->with_sud ? std::to_string(m->with_sud->n) : "-")
                << std::setw(12) << fmt_cell(m->with_sud, &CohortStats::strict_f1) << std::setw(12)
                << fmt_cell(m->with_sud, &CohortStats::relaxed_f1) << std::setw(12)
                << fmt_cell(m->with_sud, &CohortStats::relaxed_recall) << std::setw(12)
                << fmt_cell(m->with_sud, &CohortStats::relaxed_precision) << std::setw(12)
                << fmt_cell(m->without_sud, &CohortStats::strict_f1) << std::setw(12)
                << fmt_cell(m->combined, &CohortStats::strict_f1) << "\n";
        }
        out << "\n";
    };

    if (has_llm) category_table("LLM performance per category", true);
    if (has_regex) category_table("RegEx performance per category", false);

    if (has_llm && has_regex) {
        out << "LLM vs RegEx, strict F1 (with-SUD cohort)\n";
        out << "  " << std::left << std::setw(30) << "category" << std::right << std::setw(10)
            << "LLM" << std::setw(10) << "RegEx" << "\n";
        for (const auto& cr : report.categories) {
            if (!cr.llm || !cr.regex) continue;
            out << "  " << std::left << std::setw(30) << std::string(category_id(cr.category))
                << std::right << std::setw(10) << fmt_cell(cr.llm->with_sud, &CohortStats::strict_f1)
                << std::setw(10) << fmt_cell(cr.regex->with_sud, &CohortStats::strict_f1) << "\n";
        }
        out << "\n";
    }

    auto buckets_table = [&](const char* title, bool llm_side) {
        out << title << "\n";
        out << "  " << std::left << std::setw(30) << "category" << std::right << std::setw(8)
            << "exact" << std::setw(14) << "R=1,strict=0" << std::setw(14) << "P=1,strict=0"
            << std::setw(12) << "no overlap" << "\n";
        for (const auto& cr : report.categories) {
            const auto& m = llm_side ? cr.llm : cr.regex;
            if (!m) continue;
            out << "  " << std::left << std::setw(30) << std::string(category_id(cr.category))
                << std::right << std::setw(8) << m->buckets.exact << std::setw(14)
                << m->buckets.recall1_strict0 << std::setw(14) << m->buckets.precision1_strict0
                << std::setw(12) << m->buckets.both_zero << "\n";
        }
        out << "\n";
    };
    if (has_llm) buckets_table("LLM error composition (with-SUD cohort)", true);
    if (has_regex) buckets_table("RegEx error composition (with-SUD cohort)", false);

    if (has_llm) {
        out << "Candidate-count distribution (counts > 1)\n";
        for (const auto& cr : report.categories) {
            if (cr.candidate_histogram.empty()) continue;
            out << "  " << std::string(category_id(cr.category)) << ":";
            for (const auto& [count, freq] : cr.candidate_histogram) {
                out << " " << count << "x" << freq;
            }
            out << "\n";
        }
        out << "\n";

        out << "Note length vs candidate count (Pearson)\n";
        out << "  " << std::left << std::setw(30) << "category" << std::right << std::setw(10)
            << "r" << std::setw(12) << "p" << std::setw(8) << "n" << "  stars\n";
        for (const auto& cr : report.categories) {
            out << "  " << std::left << std::setw(30) << std::string(category_id(cr.category));
            if (cr.length_correlation) {
                out << std::right << std::setw(10) << fmt2(cr.length_correlation->r)
                    << std::setw(12) << fmt2(cr.length_correlation->p_value) << std::setw(8)
                    << cr.length_correlation->n << "  " << cr.length_correlation->stars << "\n";
            } else {
                out << std::right << std::setw(10) << "n/a" << "  (" << cr.correlation_note << ")\n";
            }
        }
        out << "\n";
    }

    if (!report.meta.empty()) {
        out << "Metadata\n";
        for (const auto& [k, v] : report.meta) {
            out << "  " << k << ": " << v << "\n";
        }
    }
    return out.str();
}

void write_report_files(const Report& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/report.json", std::ios::binary);
        if (!f) throw ValidationError("cannot write " + dir + "/report.json");
        f << report_to_json(report);
    }
    {
        std::ofstream f(dir + "/report.txt", std::ios::binary);
        if (!f) throw ValidationError("cannot write " + dir + "/report.txt");
        f << report_to_text(report);
    }
}

}  // namespace sudx
