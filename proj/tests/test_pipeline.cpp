#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "sudx/errors.hpp"
#include <httplib.h>
#include <json.hpp>

#include "sudx/metrics.hpp"
#include "sudx/pipeline.hpp"
#include "sudx/synth.hpp"

using namespace sudx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("sudx_pipe_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string write_synth_corpus(const TempDir& dir, std::size_t notes, std::uint64_t seed,
                               bool covered_only) {
    SynthConfig cfg;
    cfg.note_count = notes;
    cfg.seed = seed;
    cfg.covered_only = covered_only;
    const std::string path = dir.str("corpus.jsonl");
    write_corpus(synthesize_corpus(cfg, default_lexicons()), path);
    return path;
}

RunConfig oracle_config(const std::string& corpus, const std::string& out_dir) {
    RunConfig cfg;
    cfg.corpus_path = corpus;
    cfg.out_dir = out_dir;
    cfg.backend = "oracle";
    cfg.workers = 2;
    return cfg;
}

}  // namespace

TEST_CASE("oracle extraction covers every pair with zero failures") {
    TempDir dir("extract");
    const std::string corpus_path = write_synth_corpus(dir, 25, 404, true);
    const RunConfig cfg = oracle_config(corpus_path, dir.str("run"));

    const ExtractResult result = run_extract(cfg);
    CHECK(result.failures.empty());
    CHECK(result.answers.size() == result.total_pairs);
    CHECK(result.total_pairs == 25 * kCategoryCount);
    CHECK(fs::exists(dir.str("run/answers.jsonl")));
    CHECK(fs::exists(dir.str("run/candidates.jsonl")));
    CHECK(fs::exists(dir.str("run/run_config.json")));
    CHECK(fs::exists(dir.str("run/run_meta.json")));

    // answers round-trip through the loader
    const auto loaded = load_answers(dir.str("run/answers.jsonl"));
    CHECK(loaded.size() == result.answers.size());

    // every record carries the config hash
    const std::string hash = config_hash(cfg);
    std::ifstream in(dir.str("run/answers.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
        CHECK(line.find(hash) != std::string::npos);
    }
}

TEST_CASE("extraction answers agree with gold on a covered corpus") {
    TempDir dir("fidelity");
    const std::string corpus_path = write_synth_corpus(dir, 30, 505, true);
    const ExtractResult result = run_extract(oracle_config(corpus_path, dir.str("run")));

    WhitespaceTokenizer tok;
    const Corpus corpus = load_corpus(corpus_path, tok);
    std::size_t agree = 0, total = 0;
    for (const auto& g : corpus.annotations) {
        for (const auto& a : result.answers) {
            if (a.note_id == g.note_id && a.category == g.category) {
                ++total;
                if (strict_score(a.text, g.gold) == 1) ++agree;
            }
        }
    }
    CHECK(total == corpus.annotations.size());
    CHECK(agree == total);
}

TEST_CASE("two identical runs produce byte-identical outputs") {
    TempDir dir("determinism");
    const std::string corpus_path = write_synth_corpus(dir, 20, 606, false);
    RunConfig a = oracle_config(corpus_path, dir.str("run_a"));
    RunConfig b = oracle_config(corpus_path, dir.str("run_b"));
    b.workers = 4;  // execution knobs must not change bytes
    run_extract(a);
    run_extract(b);
    CHECK(slurp(dir.str("run_a/answers.jsonl")) == slurp(dir.str("run_b/answers.jsonl")));
    CHECK(slurp(dir.str("run_a/candidates.jsonl")) == slurp(dir.str("run_b/candidates.jsonl")));
}

TEST_CASE("interrupted runs resume to identical bytes") {
    TempDir dir("resume");
    const std::string corpus_path = write_synth_corpus(dir, 18, 707, false);
    RunConfig full_cfg = oracle_config(corpus_path, dir.str("full"));
    run_extract(full_cfg);
    const std::string want_answers = slurp(dir.str("full/answers.jsonl"));
    const std::string want_candidates = slurp(dir.str("full/candidates.jsonl"));

    // simulate an interrupt: keep a prefix of the answers plus a torn line
    RunConfig part_cfg = oracle_config(corpus_path, dir.str("part"));
    run_extract(part_cfg);
    {
        std::string full = slurp(dir.str("part/answers.jsonl"));
        std::size_t cut = 0;
        for (int i = 0; i < 40; ++i) cut = full.find('\n', cut) + 1;  // 40 whole records
        std::ofstream out(dir.str("part/answers.jsonl"), std::ios::binary | std::ios::trunc);
        out << full.substr(0, cut) << "{\"record\":\"answer\",\"note_id\":\"torn";
    }
    const ExtractResult resumed = run_extract(part_cfg);
    CHECK(resumed.resumed_pairs > 0);
    CHECK(resumed.resumed_pairs < resumed.total_pairs);
    CHECK(slurp(dir.str("part/answers.jsonl")) == want_answers);
    CHECK(slurp(dir.str("part/candidates.jsonl")) == want_candidates);

    // a torn candidates file must also converge: notes whose candidates did
    // not reach disk are recomputed even when their answers did
    {
        std::string cands = slurp(dir.str("part/candidates.jsonl"));
        std::ofstream out(dir.str("part/candidates.jsonl"),
                          std::ios::binary | std::ios::trunc);
        out << cands.substr(0, cands.size() / 4);
    }
    const ExtractResult resumed2 = run_extract(part_cfg);
    CHECK(resumed2.resumed_pairs < resumed.total_pairs);
    CHECK(slurp(dir.str("part/answers.jsonl")) == want_answers);
    CHECK(slurp(dir.str("part/candidates.jsonl")) == want_candidates);
}

TEST_CASE("a changed config refuses to reuse the output directory") {
    TempDir dir("mismatch");
    const std::string corpus_path = write_synth_corpus(dir, 6, 808, false);
    RunConfig cfg = oracle_config(corpus_path, dir.str("run"));
    run_extract(cfg);
    cfg.corruption_rate = 0.5;
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);
}

TEST_CASE("operational selection works without gold and keeps ranked lists") {
    TempDir dir("operational");
    const std::string corpus_path = write_synth_corpus(dir, 10, 909, false);
    RunConfig cfg = oracle_config(corpus_path, dir.str("run"));
    cfg.selection = "operational";
    const ExtractResult result = run_extract(cfg);
    CHECK(result.failures.empty());
    bool saw_ranked = false;
    for (const auto& a : result.answers) {
        if (!a.ranked.empty()) saw_ranked = true;
    }
    CHECK(saw_ranked);
}

TEST_CASE("baseline produces the same record shape") {
    TempDir dir("baseline");
    const std::string corpus_path = write_synth_corpus(dir, 15, 111, true);
    RunConfig cfg = oracle_config(corpus_path, dir.str("run"));
    const ExtractResult result = run_baseline(cfg);
    CHECK(result.failures.empty());
    CHECK(result.answers.size() == 15 * kCategoryCount);
    const auto loaded = load_answers(dir.str("run/answers_regex.jsonl"));
    CHECK(loaded.size() == result.answers.size());
}

TEST_CASE("eval writes reports and scores for one or two methods") {
    TempDir dir("eval");
    const std::string corpus_path = write_synth_corpus(dir, 12, 222, true);
    RunConfig ex = oracle_config(corpus_path, dir.str("run"));
    run_extract(ex);
    RunConfig bl = oracle_config(corpus_path, dir.str("run"));
    run_baseline(bl);

    EvalConfig ev;
    ev.corpus_path = corpus_path;
    ev.llm_answers_path = dir.str("run/answers.jsonl");
    ev.regex_answers_path = dir.str("run/answers_regex.jsonl");
    ev.report_dir = dir.str("report");
    const Report rep = run_eval(ev);
    CHECK(rep.categories.size() == kCategoryCount);
    CHECK(fs::exists(dir.str("report/report.json")));
    CHECK(fs::exists(dir.str("report/report.txt")));
    CHECK(fs::exists(dir.str("report/scores.jsonl")));

    // mismatched note sets fail
    EvalConfig bad = ev;
    bad.corpus_path = write_synth_corpus(dir, 5, 333, true);
    CHECK_THROWS_AS(run_eval(bad), ValidationError);

    EvalConfig none;
    none.corpus_path = corpus_path;
    none.report_dir = dir.str("r2");
    CHECK_THROWS_AS(run_eval(none), ValidationError);
}

TEST_CASE("the full pipeline runs against a remote endpoint") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        const auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("prompt"));
        REQUIRE(body.at("greedy").get<bool>());
        nlohmann::json out;
        // decline everything; the pipeline must still cover every pair
        out["generated_text"] = "unanswerable";
        res.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir("remote");
    const std::string corpus_path = write_synth_corpus(dir, 4, 616, true);
    RunConfig cfg = oracle_config(corpus_path, dir.str("run"));
    cfg.backend = "remote";
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/generate";
    cfg.max_in_flight = 2;
    const ExtractResult result = run_extract(cfg);
    CHECK(result.failures.empty());
    CHECK(result.answers.size() == 4 * kCategoryCount);
    CHECK(requests.load() >= 44);
    for (const auto& a : result.answers) CHECK(a.text == "unanswerable");

    server.stop();
    server_thread.join();
}

TEST_CASE("remote failures are per-pair, reported, and keep the run alive") {
    TempDir dir("failures");
    const std::string corpus_path = write_synth_corpus(dir, 2, 444, true);
    RunConfig cfg = oracle_config(corpus_path, dir.str("run"));
    cfg.backend = "remote";
    cfg.endpoint = "http://127.0.0.1:1/generate";  // connection refused
    cfg.retry = {1, 1};
    cfg.timeout_s = 1;
    cfg.workers = 1;
    const ExtractResult result = run_extract(cfg);
    CHECK(result.failures.size() == result.total_pairs);
    CHECK(result.answers.empty());
    // nothing persisted for failed notes; a later oracle run under the same
    // dir is rejected because the config differs
    cfg.backend = "oracle";
    cfg.endpoint.clear();
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);
}

TEST_CASE("config validation failures") {
    RunConfig cfg;
    cfg.corpus_path = "/nonexistent/corpus.jsonl";
    cfg.out_dir = "/tmp/sudx_never";
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);

    TempDir dir("badcfg");
    cfg.corpus_path = write_synth_corpus(dir, 2, 555, false);
    cfg.backend = "quantum";
    cfg.out_dir = dir.str("run");
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);
    cfg.backend = "remote";
    cfg.endpoint.clear();
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);
    cfg.backend = "oracle";
    cfg.selection = "vibes";
    CHECK_THROWS_AS(run_extract(cfg), ValidationError);
}
