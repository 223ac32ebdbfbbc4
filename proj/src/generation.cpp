#include "sudx/generation.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sudx/errors.hpp"
#include "sudx/text.hpp"

namespace sudx {

using nlohmann::json;

namespace {

void validate_decoding(const DecodingConfig& d, const std::string& request_id) {
    if (d.max_new_tokens == 0) {
        throw ValidationError("request " + request_id + ": max_new_tokens must be positive");
    }
}

std::string truncate_tokens(const std::string& text, std::size_t max_tokens) {
    WhitespaceTokenizer tok;
    const auto spans = tok.token_spans(text);
    if (spans.size() <= max_tokens) return text;
    return text.substr(spans.front().begin, spans[max_tokens - 1].end - spans.front().begin);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct ParsedUrl {
    std::string scheme_host_port;  // what httplib::Client takes
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint URL must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    if (path_start == std::string::npos) {
        p.scheme_host_port = url;
        p.path = "/";
    } else {
        p.scheme_host_port = url.substr(0, path_start);
        p.path = url.substr(path_start);
    }
    return p;
}

// Bounded counter; blocks acquire() while at capacity.
class InFlightGate {
public:
    explicit InFlightGate(int capacity) : capacity_(capacity) {}
    void acquire() {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return active_ < capacity_; });
        ++active_;
    }
    void release() {
        {
            std::lock_guard lk(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int capacity_;
    int active_ = 0;
};

}  // namespace

WireMap load_wire_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open wire map file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("wire map file " + path + ": " + e.what());
    }
    WireMap m;
    m.prompt = doc.value("prompt", m.prompt);
    m.max_new_tokens = doc.value("max_new_tokens", m.max_new_tokens);
    m.temperature = doc.value("temperature", m.temperature);
    m.greedy = doc.value("greedy", m.greedy);
    m.generated_text = doc.value("generated_text", m.generated_text);
    return m;
}

struct RemoteBackend::Impl {
    RemoteConfig config;
    ParsedUrl url;
    InFlightGate gate;

    explicit Impl(RemoteConfig cfg)
        : config(std::move(cfg)), url(parse_url(config.endpoint)), gate(config.max_in_flight) {}
};

RemoteBackend::RemoteBackend(RemoteConfig config) {
    if (config.endpoint.empty()) throw ValidationError("remote backend needs an endpoint URL");
    if (config.max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
    impl_ = std::make_unique<Impl>(std::move(config));
}

RemoteBackend::~RemoteBackend() = default;

GenerationResponse RemoteBackend::generate(const GenerationRequest& request) {
    if (request.prompt.empty()) {
        throw ValidationError("request " + request.request_id + ": empty prompt");
    }
    validate_decoding(request.decoding, request.request_id);

    const RemoteConfig& cfg = impl_->config;
    json body;
    body[cfg.wire.prompt] = request.prompt;
    body[cfg.wire.max_new_tokens] = request.decoding.max_new_tokens;
    body[cfg.wire.temperature] = request.decoding.temperature;
    body[cfg.wire.greedy] = request.decoding.greedy;
    const std::string payload = body.dump();

    impl_->gate.acquire();
    struct Release {
        InFlightGate& g;
        ~Release() { g.release(); }
    } release{impl_->gate};

    const auto start = std::chrono::steady_clock::now();
    int attempt = 0;
    while (true) {
        ++attempt;
        httplib::Client client(impl_->url.scheme_host_port);
        client.set_connection_timeout(cfg.timeout_s, 0);
        client.set_read_timeout(cfg.timeout_s, 0);
        client.set_write_timeout(cfg.timeout_s, 0);

        auto res = client.Post(impl_->url.path, payload, "application/json");
        if (!res) {
            const auto err = res.error();
            const bool transport = err == httplib::Error::Connection ||
                                   err == httplib::Error::ConnectionTimeout ||
                                   err == httplib::Error::ProxyConnection ||
                                   err == httplib::Error::SSLConnection;
            if (transport) {
                if (attempt < cfg.retry.max_attempts) {
                    const int backoff = cfg.retry.base_backoff_ms * (1 << (attempt - 1));
                    std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                    continue;
                }
                throw TransportError("transport failure talking to " + cfg.endpoint + ": " +
                                         httplib::to_string(err),
                                     request.request_id, attempt);
            }
            if (err == httplib::Error::Read || err == httplib::Error::Write ||
                err == httplib::Error::Canceled) {
                throw TimeoutError("request timed out against " + cfg.endpoint, request.request_id,
                                   attempt);
            }
            throw ProtocolError("unexpected client error: " + httplib::to_string(err),
                                request.request_id, attempt);
        }

        if (res->status < 200 || res->status >= 300) {
            throw ProtocolError("endpoint returned status " + std::to_string(res->status),
                                request.request_id, attempt);
        }
        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("malformed response payload: ") + e.what(),
                                request.request_id, attempt);
        }
        if (!doc.contains(cfg.wire.generated_text) || !doc[cfg.wire.generated_text].is_string()) {
            throw ProtocolError("response payload lacks string field \"" +
                                    cfg.wire.generated_text + "\"",
                                request.request_id, attempt);
        }

        GenerationResponse out;
        out.request_id = request.request_id;
        out.generated_text = doc[cfg.wire.generated_text].get<std::string>();
        out.backend_name = name();
        out.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        return out;
    }
}

OracleBackend::OracleBackend(PromptRegistry registry, LexiconSet lexicons,
                             CorruptionConfig corruption)
    : registry_(std::move(registry)), lexicons_(std::move(lexicons)), corruption_(corruption) {
    if (corruption_.rate < 0.0 || corruption_.rate > 1.0) {
        throw ValidationError("corruption rate must be in [0,1]");
    }
    for (SUDCategory c : all_categories()) {
        rules_[static_cast<std::size_t>(c)] = compile_rules(lexicons_.for_category(c));
    }
}

bool OracleBackend::corruption_hit(std::uint64_t seed, std::string_view prompt, double rate) {
    if (rate <= 0.0) return false;
    if (rate >= 1.0) return true;
    const std::uint64_t h = splitmix64(seed ^ fnv1a(prompt));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < rate;
}

std::string OracleBackend::corrupt_answer(std::uint64_t seed, std::string_view prompt,
                                          const Lexicon& lexicon) {
    const std::uint64_t h = splitmix64(splitmix64(seed ^ fnv1a(prompt)) + 1);
    const auto& subs = lexicon.substance_phrases;
    const auto& diss = lexicon.disorder_phrases;
    // "qzx" appears in no lexicon or note, so no >=5-char common substring can
    // span both the substance and the disorder term.
    return subs[h % subs.size()] + " qzx " + diss[(h >> 32) % diss.size()];
}

std::string oracle_generate(const GenerationRequest& request, const PromptRegistry& registry,
                            const LexiconSet& lexicons,
                            const std::array<RuleSet, kCategoryCount>& rules,
                            const CorruptionConfig& corruption) {
    validate_decoding(request.decoding, request.request_id);
    const auto parsed = registry.parse_prompt(request.prompt);
    if (!parsed) {
        throw ProtocolError("oracle cannot parse prompt for request " + request.request_id,
                            request.request_id);
    }
    if (OracleBackend::corruption_hit(corruption.seed, request.prompt, corruption.rate)) {
        return OracleBackend::corrupt_answer(corruption.seed, request.prompt,
                                             lexicons.for_category(parsed->category));
    }
    const auto matches = regex_extract_text("oracle", parsed->chunk_text,
                                            rules[static_cast<std::size_t>(parsed->category)]);
    if (matches.empty()) return std::string(kSentinel);
    return truncate_tokens(matches.front().text, request.decoding.max_new_tokens);
}

GenerationResponse OracleBackend::generate(const GenerationRequest& request) {
    const auto start = std::chrono::steady_clock::now();
    GenerationResponse out;
    out.request_id = request.request_id;
    out.generated_text = oracle_generate(request, registry_, lexicons_, rules_, corruption_);
    out.backend_name = name();
    out.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<BatchOutcome> generate_batch(GenerationBackend& backend,
                                         const std::vector<GenerationRequest>& requests,
                                         int max_in_flight) {
    if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
    std::vector<BatchOutcome> outcomes(requests.size());

    auto run_one = [&](std::size_t i) {
        outcomes[i].request_id = requests[i].request_id;
        try {
            outcomes[i].response = backend.generate(requests[i]);
        } catch (const TransportError& e) {
            outcomes[i].failure = {GenerationFailure::Kind::Transport, e.what(), e.attempts};
        } catch (const TimeoutError& e) {
            outcomes[i].failure = {GenerationFailure::Kind::Timeout, e.what(), e.attempts};
        } catch (const BackendError& e) {
            outcomes[i].failure = {GenerationFailure::Kind::Protocol, e.what(), e.attempts};
        } catch (const std::exception& e) {
            outcomes[i].failure = {GenerationFailure::Kind::Protocol, e.what(), 1};
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < requests.size(); ++i) run_one(i);
        return outcomes;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= requests.size()) return;
                run_one(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return outcomes;
}

}  // namespace sudx
