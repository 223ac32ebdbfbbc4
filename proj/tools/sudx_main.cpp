#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sudx/chunk.hpp"
#include "sudx/corpus.hpp"
#include "sudx/errors.hpp"
#include "sudx/lexicon.hpp"
#include "sudx/pipeline.hpp"
#include "sudx/prompt.hpp"
#include "sudx/report.hpp"
#include "sudx/synth.hpp"

namespace {

// Exit codes: 0 ok, 1 validation error, 2 partial failures, 3 total backend failure.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitPartial = 2;
constexpr int kExitTotalFailure = 3;

void add_prevalence_option(CLI::App* cmd, std::vector<std::string>& out) {
    cmd->add_option("--prevalence", out,
                    "Per-category positive fraction as <category>=<fraction>; repeatable")
        ->take_all();
}

void apply_prevalence(const std::vector<std::string>& specs, sudx::SynthConfig& cfg) {
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw sudx::ValidationError("--prevalence expects <category>=<fraction>: " + spec);
        }
        const std::string id = spec.substr(0, eq);
        const auto cat = sudx::category_from_id(id);
        if (!cat) throw sudx::ValidationError("unknown category in --prevalence: " + id);
        double fraction = 0.0;
        std::size_t consumed = 0;
        try {
            fraction = std::stod(spec.substr(eq + 1), &consumed);
        } catch (const std::exception&) {
            throw sudx::ValidationError("bad fraction in --prevalence: " + spec);
        }
        if (consumed != spec.size() - eq - 1) {
            throw sudx::ValidationError("bad fraction in --prevalence: " + spec);
        }
        cfg.prevalence[static_cast<std::size_t>(*cat)] = fraction;
    }
}

int report_failures(const sudx::ExtractResult& result) {
    if (result.failures.empty()) return kExitOk;
    std::cerr << result.failures.size() << " of " << result.total_pairs
              << " (note, category) pairs failed:\n";
    const std::size_t shown = std::min<std::size_t>(result.failures.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& f = result.failures[i];
        std::cerr << "  (" << f.note_id << ", " << sudx::category_id(f.category)
                  << "): " << f.error << "\n";
    }
    if (result.failures.size() > shown) {
        std::cerr << "  ... " << (result.failures.size() - shown) << " more\n";
    }
    return result.failures.size() >= result.total_pairs - result.resumed_pairs
               ? kExitTotalFailure
               : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot extraction of SUD diagnosis severity spans from clinical notes"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated corpus");
    sudx::SynthConfig synth_cfg;
    std::string synth_out, synth_lexicon;
    std::vector<std::string> synth_prev;
    synth->add_option("--count", synth_cfg.note_count, "Number of notes")->required();
    synth->add_option("--seed", synth_cfg.seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output corpus file")->required();
    synth->add_option("--lexicon", synth_lexicon, "Lexicon file (defaults to built-ins)");
    synth->add_option("--mean-tokens", synth_cfg.mean_tokens, "Target mean note length");
    synth->add_option("--median-tokens", synth_cfg.median_tokens, "Target median note length");
    synth->add_flag("--covered-only", synth_cfg.covered_only,
                    "Restrict positive spans to phrasings the rule families match exactly");
    add_prevalence_option(synth, synth_prev);

    // ---- chunk (debug) ----
    auto* chunk = app.add_subcommand("chunk", "Print sliding-window chunks for a corpus");
    std::string chunk_corpus, chunk_note_id, chunk_category = "alcohol";
    sudx::ChunkingConfig chunk_cfg;
    chunk->add_option("--corpus", chunk_corpus, "Corpus file")->required();
    chunk->add_option("--note", chunk_note_id, "Only this note id");
    chunk->add_option("--category", chunk_category, "Category whose prompt budget to use");
    chunk->add_option("--max-seq-len", chunk_cfg.max_seq_len, "Maximum input sequence length");
    chunk->add_option("--doc-stride", chunk_cfg.doc_stride, "Document stride");

    // ---- extract ----
    auto* extract = app.add_subcommand("extract", "Run the zero-shot extraction pipeline");
    sudx::RunConfig run_cfg;
    extract->add_option("--corpus", run_cfg.corpus_path, "Corpus file")->required();
    extract->add_option("--lexicon", run_cfg.lexicon_path, "Lexicon file");
    extract->add_option("--prompts", run_cfg.prompts_path, "Prompt override file");
    extract->add_option("--out-dir", run_cfg.out_dir, "Run output directory")->required();
    extract->add_option("--backend", run_cfg.backend, "oracle | remote");
    extract->add_option("--endpoint", run_cfg.endpoint, "Generation endpoint URL")
        ->envname("SUDX_ENDPOINT");
    extract->add_option("--wire-map", run_cfg.wire_map_path, "Wire field-name mapping file");
    extract->add_option("--max-seq-len", run_cfg.chunking.max_seq_len, "Max input tokens");
    extract->add_option("--doc-stride", run_cfg.chunking.doc_stride, "Document stride");
    extract->add_option("--max-new-tokens", run_cfg.decoding.max_new_tokens, "Generation cap");
    extract->add_option("--temperature", run_cfg.decoding.temperature, "Decoding temperature");
    extract->add_option("--max-in-flight", run_cfg.max_in_flight, "Outstanding request cap");
    extract->add_option("--corruption-rate", run_cfg.corruption_rate,
                        "Oracle: fraction of deliberately ungrounded answers");
    extract->add_option("--corruption-seed", run_cfg.corruption_seed, "Oracle corruption seed");
    extract->add_option("--min-substring-len", run_cfg.min_substring_len,
                        "Grounding filter minimum common-substring length");
    extract->add_option("--selection", run_cfg.selection, "eval | operational");
    extract->add_option("--seed", run_cfg.run_seed, "Run seed (provenance)");
    extract->add_option("--workers", run_cfg.workers, "Worker threads");
    extract->add_option("--timeout", run_cfg.timeout_s, "Per-request timeout (s)");
    extract->add_option("--retries", run_cfg.retry.max_attempts,
                        "Attempts per request on transport errors");
    extract->add_option("--retry-backoff-ms", run_cfg.retry.base_backoff_ms,
                        "Base backoff between attempts, doubled each retry");

    // ---- baseline ----
    auto* baseline = app.add_subcommand("baseline", "Run the regex extraction baseline");
    sudx::RunConfig base_cfg;
    baseline->add_option("--corpus", base_cfg.corpus_path, "Corpus file")->required();
    baseline->add_option("--lexicon", base_cfg.lexicon_path, "Lexicon file");
    baseline->add_option("--rules", base_cfg.rules_path, "Literal pattern file (escape hatch)");
    baseline->add_option("--out-dir", base_cfg.out_dir, "Run output directory")->required();
    baseline->add_option("--selection", base_cfg.selection, "eval | operational");
    baseline->add_option("--min-substring-len", base_cfg.min_substring_len,
                         "Grounding length used by operational ranking");
    baseline->add_option("--workers", base_cfg.workers, "Worker threads");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Score answers against gold and write reports");
    sudx::EvalConfig eval_cfg;
    eval->add_option("--corpus", eval_cfg.corpus_path, "Corpus file with gold annotations")
        ->required();
    eval->add_option("--llm-answers", eval_cfg.llm_answers_path, "answers.jsonl from extract");
    eval->add_option("--regex-answers", eval_cfg.regex_answers_path,
                     "answers_regex.jsonl from baseline");
    eval->add_option("--report-dir", eval_cfg.report_dir, "Report output directory")->required();
    eval->add_option("--workers", eval_cfg.workers, "Worker threads");

    // ---- report ----
    auto* report = app.add_subcommand("report", "Re-render report.txt from report.json");
    std::string report_dir;
    report->add_option("--report-dir", report_dir, "Directory containing report.json")->required();

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "Print corpus statistics");
    std::string stats_corpus;
    stats->add_option("--corpus", stats_corpus, "Corpus file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            apply_prevalence(synth_prev, synth_cfg);
            const sudx::LexiconSet lex = synth_lexicon.empty()
                                             ? sudx::default_lexicons()
                                             : sudx::load_lexicons(synth_lexicon);
            const sudx::Corpus corpus = sudx::synthesize_corpus(synth_cfg, lex);
            sudx::write_corpus(corpus, synth_out);
            std::cout << "wrote " << corpus.notes.size() << " notes, "
                      << corpus.annotations.size() << " annotations to " << synth_out << "\n";
            return kExitOk;
        }

        if (chunk->parsed()) {
            sudx::WhitespaceTokenizer tok;
            const sudx::Corpus corpus = sudx::load_corpus(chunk_corpus, tok);
            const auto cat = sudx::category_from_id(chunk_category);
            if (!cat) throw sudx::ValidationError("unknown category: " + chunk_category);
            sudx::PromptRegistry registry;
            const std::size_t budget =
                sudx::prompt_token_budget(registry.for_category(*cat), tok);
            for (const auto& note : corpus.notes) {
                if (!chunk_note_id.empty() && note.note_id != chunk_note_id) continue;
                for (const auto& ch : sudx::chunk_note(note, budget, chunk_cfg, tok)) {
                    nlohmann::json j;
                    j["note_id"] = ch.note_id;
                    j["index"] = ch.index;
                    j["token_start"] = ch.token_start;
                    j["token_end"] = ch.token_end;
                    j["text"] = ch.text;
                    std::cout << j.dump() << "\n";
                }
            }
            return kExitOk;
        }

        if (extract->parsed()) {
            const sudx::ExtractResult result = sudx::run_extract(run_cfg);
            std::cout << "answers: " << result.answers.size() << "/" << result.total_pairs
                      << " pairs (" << result.resumed_pairs << " resumed) -> " << run_cfg.out_dir
                      << "/answers.jsonl\n";
            return report_failures(result);
        }

        if (baseline->parsed()) {
            const sudx::ExtractResult result = sudx::run_baseline(base_cfg);
            std::cout << "answers: " << result.answers.size() << "/" << result.total_pairs
                      << " pairs -> " << base_cfg.out_dir << "/answers_regex.jsonl\n";
            return report_failures(result);
        }

        if (eval->parsed()) {
            const sudx::Report rep = sudx::run_eval(eval_cfg);
            std::cout << sudx::report_to_text(rep);
            std::cout << "report written to " << eval_cfg.report_dir << "\n";
            return kExitOk;
        }

        if (report->parsed()) {
            std::ifstream in(report_dir + "/report.json");
            if (!in) throw sudx::ValidationError("cannot open " + report_dir + "/report.json");
            std::ostringstream buf;
            buf << in.rdbuf();
            const sudx::Report rep = sudx::report_from_json(buf.str());
            const std::string text = sudx::report_to_text(rep);
            std::cout << text;
            std::ofstream out(report_dir + "/report.txt", std::ios::binary);
            out << text;
            return kExitOk;
        }

        if (stats->parsed()) {
            sudx::WhitespaceTokenizer tok;
            const sudx::Corpus corpus = sudx::load_corpus(stats_corpus, tok);
            const sudx::CorpusStats st = sudx::corpus_stats(corpus);
            nlohmann::json j;
            j["notes"] = st.note_count;
            j["min_tokens"] = st.min_tokens;
            j["max_tokens"] = st.max_tokens;
            j["mean_tokens"] = st.mean_tokens;
            j["median_tokens"] = st.median_tokens;
            nlohmann::json prev;
            for (sudx::SUDCategory c : sudx::all_categories()) {
                prev[std::string(sudx::category_id(c))] =
                    st.positive_fraction[static_cast<std::size_t>(c)];
            }
            j["positive_fraction"] = prev;
            std::cout << j.dump(2) << "\n";
            return kExitOk;
        }
    } catch (const sudx::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
