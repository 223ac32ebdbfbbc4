#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sudx/chunk.hpp"
#include "sudx/corpus.hpp"
#include "sudx/generation.hpp"
#include "sudx/lexicon.hpp"
#include "sudx/postprocess.hpp"
#include "sudx/prompt.hpp"
#include "sudx/report.hpp"

namespace sudx {

/// Everything that determines a run's outputs, plus execution knobs
/// (workers, max_in_flight) that do not affect results.
struct RunConfig {
    std::string corpus_path;
    std::string lexicon_path;        // empty -> built-in defaults
    std::string prompts_path;        // optional overrides
    std::string rules_path;          // optional literal regex rules (baseline)
    ChunkingConfig chunking;
    DecodingConfig decoding;
    std::string backend = "oracle";  // oracle | remote
    std::string endpoint;
    std::string wire_map_path;
    double corruption_rate = 0.0;
    std::uint64_t corruption_seed = 0;
    std::size_t min_substring_len = 5;
    std::string selection = "eval";  // eval | operational
    std::string out_dir;
    std::uint64_t run_seed = 0;

    int workers = 4;
    int max_in_flight = 4;
    RetryPolicy retry;
    int timeout_s = 120;
};

/// Stable hex digest over the result-determining fields of the config.
/// Execution knobs are excluded, so a resumed run may change them.
std::string config_hash(const RunConfig& config);

struct PairFailure {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    std::string error;
};

struct ExtractResult {
    std::vector<FinalAnswer> answers;
    std::vector<PairFailure> failures;
    std::size_t total_pairs = 0;
    std::size_t resumed_pairs = 0;
};

/// Full zero-shot pass: chunk, prompt, generate, filter, select, persist.
/// Writes candidates.jsonl and answers.jsonl (deterministic order), a config
/// snapshot, and run_meta.json (the only file with volatile content).
/// Completed notes found in out_dir are skipped on rerun; an out_dir written
/// under a different config hash is rejected.
ExtractResult run_extract(const RunConfig& config);

/// Same record shapes via the regex rules, written to answers_regex.jsonl.
ExtractResult run_baseline(const RunConfig& config);

/// Loads an answers file written by run_extract/run_baseline.
std::vector<FinalAnswer> load_answers(const std::string& path);

struct EvalConfig {
    std::string corpus_path;
    std::string llm_answers_path;    // either may be empty, not both
    std::string regex_answers_path;
    std::string report_dir;
    int workers = 4;
    std::map<std::string, std::string> extra_meta;
};

/// Scores answers against gold and writes report.json / report.txt plus
/// scores.jsonl. Coverage gaps raise ValidationError.
Report run_eval(const EvalConfig& config);

}  // namespace sudx
