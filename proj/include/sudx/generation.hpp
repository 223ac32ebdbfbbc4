#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sudx/category.hpp"
#include "sudx/lexicon.hpp"
#include "sudx/prompt.hpp"
#include "sudx/rules.hpp"

namespace sudx {

struct DecodingConfig {
    bool greedy = true;  // when set, sampling stays off regardless of temperature
    double temperature = 1.0;
    std::size_t max_new_tokens = 100;
};

struct GenerationRequest {
    std::string request_id;
    std::string prompt;
    DecodingConfig decoding;
};

struct GenerationResponse {
    std::string request_id;
    std::string generated_text;
    std::string backend_name;
    double latency_ms = 0.0;
};

/// Uniform text-generation interface. Implementations must be safe to call
/// from multiple threads.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_backoff_ms = 500;  // doubled after each failed attempt
};

/// Field names used on the wire, remappable so common inference servers can
/// be targeted without code changes.
struct WireMap {
    std::string prompt = "prompt";
    std::string max_new_tokens = "max_new_tokens";
    std::string temperature = "temperature";
    std::string greedy = "greedy";
    std::string generated_text = "generated_text";
};

WireMap load_wire_map(const std::string& path);

struct RemoteConfig {
    std::string endpoint;  // e.g. http://host:8080/generate
    WireMap wire;
    RetryPolicy retry;
    int timeout_s = 120;
    int max_in_flight = 4;  // hard cap on outstanding requests, enforced here
};

/// HTTP POST client for a single-endpoint generation service. Transport
/// failures are retried with exponential backoff; protocol errors are not.
class RemoteBackend final : public GenerationBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string name() const override { return "remote"; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct CorruptionConfig {
    double rate = 0.0;
    std::uint64_t seed = 0;
};

/// Deterministic stand-in for a hosted model: parses the prompt back into
/// (category, chunk), applies the category's extraction rules to the chunk
/// and returns the first match, or the sentinel. With corruption enabled it
/// occasionally emits an answer that names the right substance and disorder
/// but is grounded nowhere in the note, to exercise the grounding filter.
class OracleBackend final : public GenerationBackend {
public:
    OracleBackend(PromptRegistry registry, LexiconSet lexicons,
                  CorruptionConfig corruption = {});
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string name() const override { return "oracle"; }

    /// Pure corruption decision, recomputable by tests.
    static bool corruption_hit(std::uint64_t seed, std::string_view prompt, double rate);

    /// The ungrounded answer emitted when corruption strikes.
    static std::string corrupt_answer(std::uint64_t seed, std::string_view prompt,
                                      const Lexicon& lexicon);

private:
    PromptRegistry registry_;
    LexiconSet lexicons_;
    std::array<RuleSet, kCategoryCount> rules_;
    CorruptionConfig corruption_;
};

/// Free-function form of the oracle rule.
std::string oracle_generate(const GenerationRequest& request, const PromptRegistry& registry,
                            const LexiconSet& lexicons,
                            const std::array<RuleSet, kCategoryCount>& rules,
                            const CorruptionConfig& corruption);

struct GenerationFailure {
    enum class Kind { Transport, Protocol, Timeout } kind = Kind::Transport;
    std::string message;
    int attempts = 1;
};

/// One slot of a batch result: either a response or a failure, never both.
struct BatchOutcome {
    std::string request_id;
    std::optional<GenerationResponse> response;
    std::optional<GenerationFailure> failure;
    bool ok() const { return response.has_value(); }
};

/// Issues the requests with at most max_in_flight outstanding at a time.
/// Outcomes come back in request order; per-request failures are recorded
/// in place without aborting the rest of the batch.
std::vector<BatchOutcome> generate_batch(GenerationBackend& backend,
                                         const std::vector<GenerationRequest>& requests,
                                         int max_in_flight);

}  // namespace sudx
