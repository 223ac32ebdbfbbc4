#include "sudx/pipeline.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <memory>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "sudx/batch.hpp"
#include "sudx/errors.hpp"
#include "sudx/metrics.hpp"
#include "sudx/rules.hpp"

namespace sudx {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json hashed_config_json(const RunConfig& c) {
    // Result-determining fields only; execution knobs stay out so a resumed
    // run may change them.
    json j;
    j["corpus_path"] = c.corpus_path;
    j["lexicon_path"] = c.lexicon_path;
    j["prompts_path"] = c.prompts_path;
    j["rules_path"] = c.rules_path;
    j["max_seq_len"] = c.chunking.max_seq_len;
    j["doc_stride"] = c.chunking.doc_stride;
    j["greedy"] = c.decoding.greedy;
    j["temperature"] = c.decoding.temperature;
    j["max_new_tokens"] = c.decoding.max_new_tokens;
    j["backend"] = c.backend;
    j["endpoint"] = c.endpoint;
    j["wire_map_path"] = c.wire_map_path;
    j["corruption_rate"] = c.corruption_rate;
    j["corruption_seed"] = c.corruption_seed;
    j["min_substring_len"] = c.min_substring_len;
    j["selection"] = c.selection;
    j["run_seed"] = c.run_seed;
    return j;
}

std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate_run_config(const RunConfig& c) {
    if (c.corpus_path.empty()) throw ValidationError("config: corpus path required");
    if (!fs::exists(c.corpus_path)) {
        throw ValidationError("config: corpus path does not exist: " + c.corpus_path);
    }
    for (const std::string* p : {&c.lexicon_path, &c.prompts_path, &c.rules_path,
                                 &c.wire_map_path}) {
        if (!p->empty() && !fs::exists(*p)) {
            throw ValidationError("config: path does not exist: " + *p);
        }
    }
    if (c.backend != "oracle" && c.backend != "remote") {
        throw ValidationError("config: backend must be oracle or remote");
    }
    if (c.backend == "remote" && c.endpoint.empty()) {
        throw ValidationError("config: remote backend needs --endpoint or SUDX_ENDPOINT");
    }
    if (c.selection != "eval" && c.selection != "operational") {
        throw ValidationError("config: selection must be eval or operational");
    }
    if (c.out_dir.empty()) throw ValidationError("config: output directory required");
    if (c.min_substring_len == 0) throw ValidationError("config: min substring length must be > 0");
    validate_chunking_config(c.chunking);
}

LexiconSet load_config_lexicons(const RunConfig& c) {
    return c.lexicon_path.empty() ? default_lexicons() : load_lexicons(c.lexicon_path);
}

json answer_to_json(const FinalAnswer& a, const std::string& method, const std::string& hash) {
    json j;
    j["record"] = "answer";
    j["method"] = method;
    j["note_id"] = a.note_id;
    j["category"] = std::string(category_id(a.category));
    j["text"] = a.text;
    j["candidate_count"] = a.candidate_count;
    if (a.severity) j["severity"] = std::string(severity_label(*a.severity));
    if (!a.ranked.empty()) j["ranked"] = a.ranked;
    j["config_hash"] = hash;
    return j;
}

json candidate_to_json(const CandidateAnswer& c, const std::string& hash) {
    json j;
    j["record"] = "candidate";
    j["note_id"] = c.note_id;
    j["category"] = std::string(category_id(c.category));
    j["chunk_index"] = c.chunk_index;
    j["raw_text"] = c.raw_text;
    j["final_text"] = c.final_text;
    json verdicts = json::array();
    for (const auto& v : c.verdicts) {
        json e;
        e["filter"] = v.filter_name;
        e["pass"] = v.passed;
        e["reason"] = v.reason;
        verdicts.push_back(std::move(e));
    }
    j["verdicts"] = verdicts;
    j["config_hash"] = hash;
    return j;
}

std::optional<FinalAnswer> answer_from_json(const json& j) {
    if (j.value("record", "") != "answer") return std::nullopt;
    FinalAnswer a;
    a.note_id = j.at("note_id").get<std::string>();
    const auto cat = category_from_id(j.at("category").get<std::string>());
    if (!cat) return std::nullopt;
    a.category = *cat;
    a.text = j.at("text").get<std::string>();
    a.candidate_count = j.at("candidate_count").get<std::size_t>();
    if (j.contains("severity")) {
        const std::string s = j.at("severity").get<std::string>();
        for (Severity sv : {Severity::Mild, Severity::Moderate, Severity::Severe,
                            Severity::InRemission, Severity::Unspecified}) {
            if (severity_label(sv) == s) a.severity = sv;
        }
    }
    if (j.contains("ranked")) a.ranked = j.at("ranked").get<std::vector<std::string>>();
    return a;
}

struct NoteOutput {
    bool computed = false;
    bool failed = false;
    std::vector<std::string> candidate_lines;
    std::vector<std::string> answer_lines;
    std::vector<FinalAnswer> answers;
    std::vector<PairFailure> failures;
};

// Records of completed notes found in an existing answers file, by note.
struct ResumeState {
    std::unordered_map<std::string, std::vector<FinalAnswer>> complete_notes;
};

ResumeState scan_existing_answers(const std::string& answers_path,
                                  const std::string& candidates_path) {
    ResumeState st;
    std::ifstream in(answers_path);
    if (!in) return st;
    std::unordered_map<std::string, std::vector<FinalAnswer>> by_note;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;  // partial trailing line from an interrupt
        auto a = answer_from_json(j);
        if (!a) continue;
        by_note[a->note_id].push_back(std::move(*a));
    }

    // The streams flush independently, so require the candidate records too
    // before treating a note as done.
    std::unordered_map<std::string, std::unordered_set<std::string>> cand_categories;
    std::ifstream cin(candidates_path);
    while (cin && std::getline(cin, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        if (j.value("record", "") != "candidate") continue;
        cand_categories[j.value("note_id", "")].insert(j.value("category", ""));
    }

    for (auto& [note_id, answers] : by_note) {
        if (answers.size() != kCategoryCount) continue;
        auto it = cand_categories.find(note_id);
        if (it == cand_categories.end() || it->second.size() != kCategoryCount) continue;
        st.complete_notes.emplace(note_id, std::move(answers));
    }
    return st;
}

void check_or_write_config_snapshot(const RunConfig& config, const std::string& hash) {
    fs::create_directories(config.out_dir);
    const std::string path = config.out_dir + "/run_config.json";
    json snapshot = hashed_config_json(config);
    snapshot["config_hash"] = hash;
    if (fs::exists(path)) {
        std::ifstream in(path);
        json existing;
        try {
            in >> existing;
        } catch (const json::exception&) {
            throw ValidationError("existing run_config.json in " + config.out_dir +
                                  " is unreadable; refusing to resume");
        }
        if (existing.value("config_hash", "") != hash) {
            throw ValidationError("output directory " + config.out_dir +
                                  " was written under a different config (hash " +
                                  existing.value("config_hash", "?") + " vs " + hash +
                                  "); refusing to resume");
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << snapshot.dump(2) << "\n";
}

void write_run_meta(const std::string& out_dir, const std::string& backend,
                    const ExtractResult& result, double duration_ms) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json meta;
    meta["finished_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    meta["duration_ms"] = duration_ms;
    meta["backend"] = backend;
    meta["total_pairs"] = result.total_pairs;
    meta["failed_pairs"] = result.failures.size();
    meta["resumed_pairs"] = result.resumed_pairs;
    std::ofstream out(out_dir + "/run_meta.json", std::ios::binary);
    out << meta.dump(2) << "\n";
}

// Selection step shared by the zero-shot and regex paths.
FinalAnswer select_final(const RunConfig& config, const std::vector<CandidateAnswer>& cands,
                         const GoldAnnotation* gold, const std::string& note_text,
                         const Lexicon& lexicon) {
    if (config.selection == "eval") {
        if (gold == nullptr) {
            throw ValidationError("eval selection needs a gold annotation for every pair; "
                                  "use --selection operational for unannotated corpora");
        }
        return select_candidate_eval(cands, gold->gold, lexicon);
    }
    return select_candidate_operational(cands, note_text, lexicon, config.min_substring_len);
}

}  // namespace

std::string config_hash(const RunConfig& config) {
    return fnv1a_hex(hashed_config_json(config).dump());
}

ExtractResult run_extract(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    validate_run_config(config);

    WhitespaceTokenizer tok;
    const Corpus corpus = load_corpus(config.corpus_path, tok);
    const LexiconSet lexicons = load_config_lexicons(config);
    PromptRegistry registry;
    if (!config.prompts_path.empty()) registry.apply_overrides_file(config.prompts_path);

    std::unique_ptr<GenerationBackend> backend;
    if (config.backend == "remote") {
        RemoteConfig rc;
        rc.endpoint = config.endpoint;
        if (!config.wire_map_path.empty()) rc.wire = load_wire_map(config.wire_map_path);
        rc.retry = config.retry;
        rc.timeout_s = config.timeout_s;
        rc.max_in_flight = config.max_in_flight;
        backend = std::make_unique<RemoteBackend>(std::move(rc));
    } else {
        backend = std::make_unique<OracleBackend>(
            registry, lexicons, CorruptionConfig{config.corruption_rate, config.corruption_seed});
    }
    const bool remote = config.backend == "remote";

    const std::string hash = config_hash(config);
    check_or_write_config_snapshot(config, hash);

    // Per-category prompt budgets decide the chunk window.
    std::array<std::size_t, kCategoryCount> budgets{};
    for (SUDCategory c : all_categories()) {
        budgets[static_cast<std::size_t>(c)] =
            prompt_token_budget(registry.for_category(c), tok);
        if (budgets[static_cast<std::size_t>(c)] >= config.chunking.max_seq_len) {
            throw ValidationError("prompt for " + std::string(category_id(c)) +
                                  " exceeds max_seq_len");
        }
    }

    // Gold index (eval selection needs it).
    std::unordered_map<std::string, const GoldAnnotation*> gold_idx;
    for (const auto& g : corpus.annotations) {
        gold_idx[g.note_id + "\x1f" + std::string(category_id(g.category))] = &g;
    }

    // Resume: keep the longest prefix of fully-completed notes.
    const std::string answers_path = config.out_dir + "/answers.jsonl";
    const std::string candidates_path = config.out_dir + "/candidates.jsonl";
    ResumeState resume = scan_existing_answers(answers_path, candidates_path);
    std::size_t done_prefix = 0;
    while (done_prefix < corpus.notes.size() &&
           resume.complete_notes.count(corpus.notes[done_prefix].note_id) > 0) {
        ++done_prefix;
    }

    ExtractResult result;
    result.total_pairs = corpus.notes.size() * kCategoryCount;
    result.resumed_pairs = done_prefix * kCategoryCount;

    // Rewrite the files down to the resumable prefix. Candidate records of the
    // prefix are preserved as-is.
    std::vector<std::string> kept_candidate_lines;
    if (done_prefix > 0 && fs::exists(candidates_path)) {
        std::unordered_set<std::string> keep;
        for (std::size_t i = 0; i < done_prefix; ++i) keep.insert(corpus.notes[i].note_id);
        std::ifstream in(candidates_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            if (keep.count(j.value("note_id", "")) > 0) kept_candidate_lines.push_back(line);
        }
    }
    std::ofstream answers_out(answers_path, std::ios::binary | std::ios::trunc);
    std::ofstream candidates_out(candidates_path, std::ios::binary | std::ios::trunc);
    if (!answers_out || !candidates_out) {
        throw ValidationError("cannot write outputs under " + config.out_dir);
    }
    for (const auto& line : kept_candidate_lines) candidates_out << line << "\n";
    for (std::size_t i = 0; i < done_prefix; ++i) {
        for (const auto& a : resume.complete_notes.at(corpus.notes[i].note_id)) {
            answers_out << answer_to_json(a, "llm", hash).dump() << "\n";
            result.answers.push_back(a);
        }
    }
    // Candidates land on disk before the answers that declare a note done.
    candidates_out.flush();
    answers_out.flush();

    auto process_note = [&](std::size_t ni, NoteOutput& out) {
        const ClinicalNote& note = corpus.notes[ni];
        for (SUDCategory c : all_categories()) {
            const std::size_t ci = static_cast<std::size_t>(c);
            try {
                const auto chunks = chunk_note(note, budgets[ci], config.chunking, tok);
                std::vector<GenerationRequest> requests;
                requests.reserve(chunks.size());
                for (const Chunk& ch : chunks) {
                    GenerationRequest r;
                    r.request_id = note.note_id + ":" + std::string(category_id(c)) + ":" +
                                   std::to_string(ch.index);
                    r.prompt = render_prompt(registry.for_category(c), ch);
                    r.decoding = config.decoding;
                    requests.push_back(std::move(r));
                }

                std::vector<std::string> raw_texts;
                raw_texts.reserve(requests.size());
                const auto outcomes =
                    generate_batch(*backend, requests, remote ? config.max_in_flight : 1);
                std::string first_error;
                for (const auto& o : outcomes) {
                    if (o.ok()) {
                        raw_texts.push_back(o.response->generated_text);
                    } else if (first_error.empty()) {
                        first_error = o.failure->message;
                    }
                }
                if (!first_error.empty()) {
                    out.failed = true;
                    out.failures.push_back({note.note_id, c, first_error});
                    continue;
                }

                auto cands = apply_filters(note.note_id, c, raw_texts, note.text,
                                           lexicons.for_category(c), config.min_substring_len);
                const GoldAnnotation* gold = nullptr;
                auto git = gold_idx.find(note.note_id + "\x1f" + std::string(category_id(c)));
                if (git != gold_idx.end()) gold = git->second;
                FinalAnswer chosen = select_final(config, cands, gold, note.text,
                                                   lexicons.for_category(c));
                chosen.note_id = note.note_id;
                chosen.category = c;

                for (const auto& cand : cands) {
                    out.candidate_lines.push_back(candidate_to_json(cand, hash).dump());
                }
                out.answer_lines.push_back(answer_to_json(chosen, "llm", hash).dump());
                out.answers.push_back(std::move(chosen));
            } catch (const std::exception& e) {
                out.failed = true;
                out.failures.push_back({note.note_id, c, e.what()});
            }
        }
        out.computed = true;
    };

    const int workers = std::max(1, config.workers);
    const std::size_t block = static_cast<std::size_t>(workers) * 4;
    for (std::size_t base = done_prefix; base < corpus.notes.size(); base += block) {
        const std::size_t end = std::min(base + block, corpus.notes.size());
        std::vector<NoteOutput> outputs(end - base);
        if (workers > 1) {
            const long n = static_cast<long>(end - base);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
            for (long k = 0; k < n; ++k) {
                process_note(base + static_cast<std::size_t>(k),
                             outputs[static_cast<std::size_t>(k)]);
            }
        } else {
            for (std::size_t k = 0; k < end - base; ++k) process_note(base + k, outputs[k]);
        }
        // Single ordered writer: a note is persisted only when every one of
        // its pairs succeeded, so an interrupted run resumes cleanly.
        for (auto& out : outputs) {
            for (auto& f : out.failures) result.failures.push_back(std::move(f));
            for (auto& a : out.answers) result.answers.push_back(std::move(a));
            if (out.failed) continue;
            for (const auto& line : out.candidate_lines) candidates_out << line << "\n";
            for (const auto& line : out.answer_lines) answers_out << line << "\n";
        }
        candidates_out.flush();
        answers_out.flush();
    }

    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_run_meta(config.out_dir, config.backend, result, ms);
    return result;
}

ExtractResult run_baseline(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    validate_run_config(config);

    WhitespaceTokenizer tok;
    const Corpus corpus = load_corpus(config.corpus_path, tok);
    const LexiconSet lexicons = load_config_lexicons(config);

    std::array<RuleSet, kCategoryCount> rules;
    if (!config.rules_path.empty()) {
        std::ifstream in(config.rules_path);
        if (!in) throw ValidationError("cannot open rules file: " + config.rules_path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ValidationError("rules file " + config.rules_path + ": " + e.what());
        }
        for (SUDCategory c : all_categories()) {
            const std::string id(category_id(c));
            if (!doc.contains(id)) {
                throw ValidationError("rules file " + config.rules_path + ": missing category " +
                                      id);
            }
            rules[static_cast<std::size_t>(c)] =
                compile_literal_rules(c, doc.at(id).get<std::vector<std::string>>());
        }
    } else {
        for (SUDCategory c : all_categories()) {
            rules[static_cast<std::size_t>(c)] = compile_rules(lexicons.for_category(c));
        }
    }

    const std::string hash = config_hash(config);
    fs::create_directories(config.out_dir);

    std::unordered_map<std::string, const GoldAnnotation*> gold_idx;
    for (const auto& g : corpus.annotations) {
        gold_idx[g.note_id + "\x1f" + std::string(category_id(g.category))] = &g;
    }

    const auto matches = regex_extract_batch(corpus, rules, std::max(1, config.workers));

    ExtractResult result;
    result.total_pairs = corpus.notes.size() * kCategoryCount;

    std::ofstream out(config.out_dir + "/answers_regex.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write outputs under " + config.out_dir);

    for (std::size_t ni = 0; ni < corpus.notes.size(); ++ni) {
        const ClinicalNote& note = corpus.notes[ni];
        for (SUDCategory c : all_categories()) {
            const std::size_t ci = static_cast<std::size_t>(c);
            const auto& ms = matches[ni * kCategoryCount + ci];
            std::vector<CandidateAnswer> cands;
            cands.reserve(ms.size());
            for (std::size_t k = 0; k < ms.size(); ++k) {
                CandidateAnswer cand;
                cand.note_id = note.note_id;
                cand.category = c;
                cand.chunk_index = k;  // match ordinal
                cand.raw_text = ms[k].text;
                cand.final_text = ms[k].text;
                cands.push_back(std::move(cand));
            }
            const GoldAnnotation* gold = nullptr;
            auto git = gold_idx.find(note.note_id + "\x1f" + std::string(category_id(c)));
            if (git != gold_idx.end()) gold = git->second;
            FinalAnswer chosen =
                select_final(config, cands, gold, note.text, lexicons.for_category(c));
            chosen.note_id = note.note_id;
            chosen.category = c;
            out << answer_to_json(chosen, "regex", hash).dump() << "\n";
            result.answers.push_back(std::move(chosen));
        }
    }
    out.flush();

    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_run_meta(config.out_dir, "regex", result, ms);
    return result;
}

namespace {

// Provenance hash carried by the records of an answers file, if any.
std::string answers_config_hash(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) return "";
        return j.value("config_hash", "");
    }
    return "";
}

}  // namespace

std::vector<FinalAnswer> load_answers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open answers file: " + path);
    std::vector<FinalAnswer> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        auto a = answer_from_json(j);
        if (!a) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": not an answer record");
        }
        out.push_back(std::move(*a));
    }
    return out;
}

Report run_eval(const EvalConfig& config) {
    if (config.llm_answers_path.empty() && config.regex_answers_path.empty()) {
        throw ValidationError("eval: need at least one answers file");
    }
    WhitespaceTokenizer tok;
    const Corpus corpus = load_corpus(config.corpus_path, tok);

    std::optional<std::vector<FinalAnswer>> llm, regex;
    if (!config.llm_answers_path.empty()) llm = load_answers(config.llm_answers_path);
    if (!config.regex_answers_path.empty()) regex = load_answers(config.regex_answers_path);

    std::map<std::string, std::string> meta = config.extra_meta;
    meta["corpus"] = config.corpus_path;
    if (llm) {
        meta["llm_answers"] = fs::path(config.llm_answers_path).filename().string();
        meta["llm_config_hash"] = answers_config_hash(config.llm_answers_path);
    }
    if (regex) {
        meta["regex_answers"] = fs::path(config.regex_answers_path).filename().string();
        meta["regex_config_hash"] = answers_config_hash(config.regex_answers_path);
    }

    Report report = build_report(llm ? &*llm : nullptr, regex ? &*regex : nullptr, corpus,
                                 std::move(meta), std::max(1, config.workers));

    if (!config.report_dir.empty()) {
        write_report_files(report, config.report_dir);
        std::ofstream scores(config.report_dir + "/scores.jsonl", std::ios::binary);
        auto dump_scores = [&](const std::vector<SampleScore>& samples, const char* method,
                               const std::string& hash) {
            for (const auto& s : samples) {
                json j;
                j["record"] = "score";
                j["method"] = method;
                j["note_id"] = s.note_id;
                j["category"] = std::string(category_id(s.category));
                j["strict"] = s.strict;
                j["relaxed_precision"] = s.relaxed_precision;
                j["relaxed_recall"] = s.relaxed_recall;
                j["relaxed_f1"] = s.relaxed_f1;
                j["tp"] = s.tp;
                j["fp"] = s.fp;
                j["fn"] = s.fn;
                j["config_hash"] = hash;
                scores << j.dump() << "\n";
            }
        };
        dump_scores(report.llm_samples, "llm",
                    report.meta.count("llm_config_hash") ? report.meta.at("llm_config_hash")
                                                         : std::string());
        dump_scores(report.regex_samples, "regex",
                    report.meta.count("regex_config_hash") ? report.meta.at("regex_config_hash")
                                                           : std::string());
    }
    return report;
}

}  // namespace sudx
