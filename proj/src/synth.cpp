#include "sudx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sudx/errors.hpp"

namespace sudx {

namespace {

// Deterministic across platforms; std distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double normal() {
        const double u1 = 1.0 - uniform();  // (0,1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    return x ^ (x >> 27);
}

// Filler vocabulary, vetted to contain no substance, disorder or severity
// phrase from the default lexicons (and nothing that would complete one).
const std::vector<std::string_view>& filler_words() {
    static const std::vector<std::string_view> words = {
        "patient",   "reports",   "denies",     "states",       "feels",      "improved",
        "stable",    "clinic",    "visit",      "today",        "plan",       "continue",
        "monitor",   "review",    "sleep",      "appetite",     "mood",       "anxious",
        "calm",      "symptoms",  "therapy",    "session",      "group",      "individual",
        "goals",     "progress",  "week",       "month",        "daily",      "morning",
        "evening",   "medication","dose",       "adjusted",     "tolerated",  "well",
        "acute",     "distress",  "vitals",     "within",       "normal",     "limits",
        "exam",      "unremarkable", "labs",    "pending",      "ordered",    "discussed",
        "risks",     "benefits",  "education",  "provided",     "support",    "family",
        "housing",   "employment","transport",  "barriers",     "coping",     "skills",
        "strategies","prevention","triggers",   "identified",   "safety",     "assessed",
        "ideation",  "contracted","care",       "coordination", "referral",   "placed",
        "scheduled", "next",      "appointment","weeks",        "return",     "sooner",
        "needed",    "history",   "chronic",    "pain",         "managed",    "primary",
        "provider",  "sessions",  "attended",   "engaged",      "participated", "homework",
        "assigned",  "completed", "partial",    "response",     "treatment",  "continues",
        "gradual",   "improvement", "noted",    "overall",      "functioning", "baseline",
        "maintained","follow",    "encouraged", "agreeable",    "reviewed",   "goals",
    };
    return words;
}

const std::vector<std::string_view>& note_types() {
    static const std::vector<std::string_view> types = {
        "mental health", "psychiatry", "nursing", "education", "administrative", "psychology",
    };
    return types;
}

const std::vector<std::string_view>& section_headers() {
    static const std::vector<std::string_view> headers = {
        "Diagnoses:", "Active problems:", "Impression:",
    };
    return headers;
}

std::string sentence(Rng& rng, std::size_t word_target) {
    const auto& vocab = filler_words();
    std::string s;
    for (std::size_t i = 0; i < word_target; ++i) {
        std::string_view w = vocab[rng.below(vocab.size())];
        if (i == 0) {
            s.push_back(static_cast<char>(w[0] - 'a' + 'A'));
            s.append(w.substr(1));
        } else {
            s.push_back(' ');
            if (i + 1 < word_target && rng.below(12) == 0) {
                s.back() = ',';
                s.push_back(' ');
            }
            s.append(w);
        }
    }
    s.push_back('.');
    return s;
}

// Appends roughly `tokens` whitespace tokens of filler prose.
void append_filler(std::string& out, Rng& rng, std::size_t tokens) {
    std::size_t produced = 0;
    while (produced < tokens) {
        const std::size_t want = std::min<std::size_t>(4 + rng.below(12), tokens - produced);
        if (!out.empty()) out.push_back(rng.below(4) == 0 ? '\n' : ' ');
        out.append(sentence(rng, std::max<std::size_t>(want, 1)));
        produced += std::max<std::size_t>(want, 1);
    }
}

std::vector<std::string> graded_severities(const Lexicon& lex) {
    // Severity words usable in slash chains; remission states read oddly there.
    std::vector<std::string> out;
    for (const auto& s : lex.severity_phrases) {
        if (s.find("remission") == std::string::npos) out.push_back(s);
    }
    return out;
}

std::string parametric_span(Rng& rng, const Lexicon& lex) {
    const auto& subs = lex.substance_phrases;
    const auto& diss = lex.disorder_phrases;
    const auto graded = graded_severities(lex);
    const std::string sub = subs[rng.below(subs.size())];
    const std::string dis = diss[rng.below(diss.size())];

    switch (rng.below(graded.empty() ? 1 : 5)) {
        case 0:
            return sub + " " + dis;
        case 1:
            return graded[rng.below(graded.size())] + " " + sub + " " + dis;
        case 2:
            return sub + " " + dis + ", " + lex.severity_phrases[rng.below(lex.severity_phrases.size())];
        case 3:
            return sub + " " + dis + " " + lex.severity_phrases[rng.below(lex.severity_phrases.size())];
        default: {
            const std::string a = graded[rng.below(graded.size())];
            std::string b = graded[rng.below(graded.size())];
            return sub + " " + dis + " " + a + "/" + b;
        }
    }
}

}  // namespace

const std::vector<CuratedPhrasing>& curated_phrasings() {
    static const std::vector<CuratedPhrasing> phrasings = {
        {SUDCategory::Cannabis, "cannabis/alcohol/opioid use disorder: mild", false},
        {SUDCategory::Alcohol, "alcohol use disorder mod/severe", true},
        {SUDCategory::Caffeine, "moderate caffeine use do", true},
        {SUDCategory::Opioid, "opioid (heroin/ vicodin) use disorder - severe (on agonist therapy)",
         false},
        {SUDCategory::Cannabis, "marijuana user (in remission)", false},
        {SUDCategory::Cannabis, "cannabis (thc vape) use disorder, mild", true},
        {SUDCategory::SedativeHypnoticAnxiolytic,
         "(ephedrine) sedative use disorder, in sustained remission", false},
        {SUDCategory::SedativeHypnoticAnxiolytic,
         "sedative hypnotic use disorder, severe (xanax)", false},
        {SUDCategory::Cocaine,
         "meets criteria for substance use disorder: cocaine [] mild (2-3); [] moderate (4-5); "
         "[x] severe (6 or more)",
         false},
        {SUDCategory::Amphetamine,
         "amphetamine (methamphetamine) or other stimulant, without perceptual disturbances "
         "disorder, sever, in remission",
         false},
        {SUDCategory::Hallucinogen,
         "other hallucinogen use disorder (mdma/ecstasy), moderate, in remission", false},
        {SUDCategory::OtherPsychoactive, "other/unknown substance disorder: severe (coricidin)",
         false},
        {SUDCategory::Inhalant, "moderate inhalant (nitrous oxide) use d/o", true},
    };
    return phrasings;
}

Corpus synthesize_corpus(const SynthConfig& config, const LexiconSet& lexicons) {
    if (config.note_count == 0) throw ValidationError("synth: note_count must be positive");
    for (double p : config.prevalence) {
        if (p < 0.0 || p > 1.0) throw ValidationError("synth: prevalence must be in [0,1]");
    }
    if (config.median_tokens <= 0.0 || config.mean_tokens < config.median_tokens) {
        throw ValidationError("synth: need mean_tokens >= median_tokens > 0");
    }

    const std::size_t n = config.note_count;
    const double mu = std::log(config.median_tokens);
    const double sigma = std::sqrt(2.0 * std::log(config.mean_tokens / config.median_tokens));

    // Quota-based positive assignment keeps realized prevalence within
    // rounding of the configured fraction.
    std::vector<std::vector<bool>> positive(kCategoryCount, std::vector<bool>(n, false));
    for (SUDCategory c : all_categories()) {
        const std::size_t ci = static_cast<std::size_t>(c);
        const std::size_t quota = static_cast<std::size_t>(
            std::llround(config.prevalence[ci] * static_cast<double>(n)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix(config.seed, fnv1a(category_id(c))));
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        for (std::size_t i = 0; i < quota && i < n; ++i) positive[ci][order[i]] = true;
    }

    // Curated pool per category, honoring covered_only.
    std::vector<std::vector<std::string_view>> curated(kCategoryCount);
    for (const auto& ph : curated_phrasings()) {
        if (config.covered_only && !ph.rule_covered) continue;
        curated[static_cast<std::size_t>(ph.category)].push_back(ph.text);
    }

    Corpus corpus;
    corpus.notes.reserve(n);
    corpus.annotations.reserve(n * kCategoryCount);
    WhitespaceTokenizer tok;

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix(config.seed, 0x10000 + i));

        // Target length, truncated log-normal.
        double target = 0.0;
        for (int tries = 0; tries < 100; ++tries) {
            target = std::exp(mu + sigma * rng.normal());
            if (target >= static_cast<double>(config.min_tokens) &&
                target <= static_cast<double>(config.max_tokens)) {
                break;
            }
        }
        target = std::clamp(target, static_cast<double>(config.min_tokens),
                            static_cast<double>(config.max_tokens));
        const std::size_t target_tokens = static_cast<std::size_t>(target);

        // Gold spans for this note, in category order.
        std::vector<std::pair<SUDCategory, std::string>> spans;
        for (SUDCategory c : all_categories()) {
            const std::size_t ci = static_cast<std::size_t>(c);
            if (!positive[ci][i]) continue;
            const auto& pool = curated[ci];
            std::string span;
            if (!pool.empty() && rng.below(2) == 0) {
                span = std::string(pool[rng.below(pool.size())]);
            } else {
                span = parametric_span(rng, lexicons.for_category(c));
            }
            spans.emplace_back(c, std::move(span));
        }

        std::string section;
        std::size_t section_tokens = 0;
        if (!spans.empty()) {
            section = std::string(section_headers()[rng.below(section_headers().size())]);
            for (std::size_t k = 0; k < spans.size(); ++k) {
                section += "\n" + std::to_string(k + 1) + ". ";
                if (rng.below(4) == 0) section += "dx: ";
                section += spans[k].second;
            }
            section_tokens = tok.count(section);
        }

        const std::size_t filler_total =
            target_tokens > section_tokens ? target_tokens - section_tokens : 1;
        const double before_frac = spans.empty() ? 1.0 : 0.1 + 0.8 * rng.uniform();
        const std::size_t before =
            std::max<std::size_t>(1, static_cast<std::size_t>(before_frac * filler_total));
        const std::size_t after = filler_total > before ? filler_total - before : 0;

        std::string text;
        append_filler(text, rng, before);
        if (!section.empty()) {
            text += "\n" + section + "\n";
        }
        if (after > 0) append_filler(text, rng, after);

        ClinicalNote note;
        note.note_id = "n" + std::string(6 - std::min<std::size_t>(6, std::to_string(i + 1).size()),
                                         '0') +
                       std::to_string(i + 1);
        note.patient_id = "p" + std::to_string(100000 + i);
        note.note_type = std::string(note_types()[rng.below(note_types().size())]);
        note.text = std::move(text);
        note.token_count = tok.count(note.text);
        corpus.notes.push_back(std::move(note));

        const std::string& note_id = corpus.notes.back().note_id;
        for (SUDCategory c : all_categories()) {
            GoldAnnotation a;
            a.note_id = note_id;
            a.category = c;
            a.gold = std::string(kSentinel);
            for (const auto& [sc, stext] : spans) {
                if (sc == c) a.gold = stext;
            }
            corpus.annotations.push_back(std::move(a));
        }
    }
    return corpus;
}

}  // namespace sudx
