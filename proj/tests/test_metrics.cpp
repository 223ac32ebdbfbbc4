#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sudx/errors.hpp"
#include "sudx/metrics.hpp"
#include "sudx/text.hpp"

using namespace sudx;

namespace {

// Independent brute-force reference for the relaxed scores: split the
// normalized strings, intersect token bags by counting.
struct BruteRelaxed {
    double p, r, f1;
    std::size_t tp, fp, fn;
};

std::vector<std::string> brute_tokens(const std::string& s) {
    const std::string norm = normalize_text(s);
    if (norm == "unanswerable") return {};
    std::vector<std::string> toks;
    std::string cur;
    for (char c : norm) {
        if (c == ' ') {
            if (!cur.empty()) toks.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

BruteRelaxed brute_relaxed(const std::string& pred, const std::string& gold) {
    auto pt = brute_tokens(pred);
    auto gt = brute_tokens(gold);
    BruteRelaxed out{};
    if (pt.empty() && gt.empty()) {
        const double v = normalize_text(pred) == normalize_text(gold) ? 1.0 : 0.0;
        out.p = out.r = out.f1 = v;
        return out;
    }
    std::vector<bool> used(gt.size(), false);
    std::size_t tp = 0;
    for (const auto& t : pt) {
        for (std::size_t j = 0; j < gt.size(); ++j) {
            if (!used[j] && gt[j] == t) {
                used[j] = true;
                ++tp;
                break;
            }
        }
    }
    out.tp = tp;
    out.fp = pt.size() - tp;
    out.fn = gt.size() - tp;
    out.p = pt.empty() ? 0.0 : double(tp) / double(pt.size());
    out.r = gt.empty() ? 0.0 : double(tp) / double(gt.size());
    out.f1 = (out.p + out.r) > 0 ? 2 * out.p * out.r / (out.p + out.r) : 0.0;
    return out;
}

std::uint64_t rng_state = 12345;
std::uint64_t rng_next() {
    rng_state += 0x9e3779b97f4a7c15ull;
    std::uint64_t x = rng_state;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string random_token_sequence(std::size_t max_len) {
    static const char* vocab[] = {"alcohol", "use", "disorder", "severe", "mild", "etoh",
                                  "d/o",     "mj",  "ud",       "mod",    "x",    "y"};
    const std::size_t len = rng_next() % (max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        if (!s.empty()) s.push_back(' ');
        s += vocab[rng_next() % 12];
    }
    return s;
}

}  // namespace

TEST_CASE("strict score") {
    CHECK(strict_score("severe etoh use d/o", "severe etoh use d/o") == 1);
    CHECK(strict_score("etoh use d/o", "severe etoh use d/o") == 0);
    CHECK(strict_score("unanswerable", "unanswerable") == 1);
    CHECK(strict_score("Severe ETOH  use d/o", "severe etoh use d/o") == 1);
    CHECK(strict_score("unanswerable", "severe etoh use d/o") == 0);
    CHECK(strict_score("severe etoh use d/o", "unanswerable") == 0);
}

TEST_CASE("relaxed scores, worked examples") {
    // pred has one extra token over gold
    auto s = relaxed_scores("severe etoh use d/o", "etoh use d/o");
    CHECK(s.tp == 3);
    CHECK(s.fp == 1);
    CHECK(s.fn == 0);
    CHECK(s.precision == doctest::Approx(0.75));
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.f1 == doctest::Approx(6.0 / 7.0));

    // order does not matter
    s = relaxed_scores("severe alcohol use disorder", "alcohol use disorder severe");
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.f1 == doctest::Approx(1.0));

    // identity
    s = relaxed_scores("a b c", "a b c");
    CHECK(s.f1 == doctest::Approx(1.0));

    // sentinel vs sentinel and sentinel vs text
    CHECK(relaxed_scores("unanswerable", "unanswerable").f1 == doctest::Approx(1.0));
    CHECK(relaxed_scores("unanswerable", "severe etoh use d/o").f1 == doctest::Approx(0.0));
    CHECK(relaxed_scores("severe etoh use d/o", "unanswerable").f1 == doctest::Approx(0.0));
    // an empty prediction is not the sentinel
    CHECK(relaxed_scores("", "unanswerable").f1 == doctest::Approx(0.0));
    CHECK(relaxed_scores("--", "unanswerable").precision == doctest::Approx(0.0));
    CHECK(relaxed_scores("Unanswerable.", "unanswerable").f1 == doctest::Approx(1.0));

    // duplicated tokens intersect as a multiset, not a set
    s = relaxed_scores("a a b", "a b b");
    CHECK(s.tp == 2);
    CHECK(s.fp == 1);
    CHECK(s.fn == 1);
}

TEST_CASE("relaxed scores match the brute-force oracle on random pairs") {
    for (int i = 0; i < 1500; ++i) {
        const std::string pred = random_token_sequence(12);
        const std::string gold = random_token_sequence(12);
        const auto got = relaxed_scores(pred, gold);
        const auto want = brute_relaxed(pred, gold);
        CAPTURE(pred);
        CAPTURE(gold);
        CHECK(got.tp == want.tp);
        CHECK(got.fp == want.fp);
        CHECK(got.fn == want.fn);
        CHECK(got.precision == doctest::Approx(want.p).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(want.r).epsilon(1e-12));
        CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));

        // strict = 1 implies relaxed F1 = 1
        if (strict_score(pred, gold) == 1) CHECK(got.f1 == doctest::Approx(1.0));
        // symmetry swaps precision and recall
        const auto rev = relaxed_scores(gold, pred);
        CHECK(rev.tp == got.tp);
        CHECK(rev.precision == doctest::Approx(got.recall));
        CHECK(rev.recall == doctest::Approx(got.precision));
    }
}

TEST_CASE("macro averaging") {
    std::vector<SampleScore> samples;
    samples.push_back(score_sample("n1", SUDCategory::Alcohol, "a", "a"));
    samples.push_back(score_sample("n2", SUDCategory::Alcohol, "b", "a"));
    auto st = macro_average(samples);
    REQUIRE(st.has_value());
    CHECK(st->n == 2);
    CHECK(st->strict_f1 == doctest::Approx(0.5));

    CHECK(!macro_average({}).has_value());

    auto single = macro_average({samples[0]});
    REQUIRE(single.has_value());
    CHECK(single->strict_f1 == doctest::Approx(1.0));
    CHECK(single->relaxed_f1 == doctest::Approx(1.0));
}

TEST_CASE("macro averages computed from shards agree with the single pass") {
    std::vector<SampleScore> samples;
    for (int i = 0; i < 101; ++i) {
        samples.push_back(score_sample("n", SUDCategory::Alcohol,
                                       random_token_sequence(6), random_token_sequence(6)));
    }
    const auto whole = macro_average(samples);
    std::vector<SampleScore> a(samples.begin(), samples.begin() + 37);
    std::vector<SampleScore> b(samples.begin() + 37, samples.end());
    const auto sa = macro_average(a);
    const auto sb = macro_average(b);
    const double merged =
        (sa->strict_f1 * double(sa->n) + sb->strict_f1 * double(sb->n)) / double(samples.size());
    CHECK(std::abs(merged - whole->strict_f1) < 1e-12);
    const double merged_f1 =
        (sa->relaxed_f1 * double(sa->n) + sb->relaxed_f1 * double(sb->n)) / double(samples.size());
    CHECK(std::abs(merged_f1 - whole->relaxed_f1) < 1e-12);
}

TEST_CASE("pearson on analytic cases") {
    auto r = pearson({1, 2, 3}, {2, 4, 6});
    CHECK(std::abs(r.r - 1.0) < 1e-12);
    CHECK(r.p_value == doctest::Approx(0.0));

    r = pearson({1, 2, 3}, {3, 2, 1});
    CHECK(std::abs(r.r + 1.0) < 1e-12);

    // affine invariance: r(ax+b, y) == r(x, y) for a > 0, negated for a < 0
    const std::vector<double> x = {1, 4, 2, 8, 5, 7, 3, 6};
    const std::vector<double> y = {2, 3, 1, 9, 6, 8, 2, 5};
    const double base = pearson(x, y).r;
    std::vector<double> ax(x.size());
    std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return 2.5 * v + 17.0; });
    CHECK(std::abs(pearson(ax, y).r - base) < 1e-12);
    std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return -1.5 * v + 3.0; });
    CHECK(std::abs(pearson(ax, y).r + base) < 1e-12);

    CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), ValidationError);
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(pearson({1, 2, 3}, {1, 2}), ValidationError);
}

TEST_CASE("pearson p-value at the documented operating point") {
    // Build data with r very close to 0.6 at n = 12 and check p ~ 0.039.
    // t = 0.6 * sqrt(10 / (1 - 0.36)) = 2.3717, two-sided p on t(10).
    const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> y;
    // y = r*x_std + sqrt(1-r^2)*noise chosen orthogonal to x; verified below.
    const std::vector<double> noise = {0.5,  -1.2, 0.8, -0.3, 1.5, -0.7,
                                       -1.0, 0.9,  0.2, -1.4, 1.1, -0.4};
    // Gram-Schmidt the noise against x and standardize both pieces.
    double mx = 0, mn = 0;
    for (double v : x) mx += v;
    for (double v : noise) mn += v;
    mx /= 12;
    mn /= 12;
    double sxx = 0, sxn = 0;
    for (int i = 0; i < 12; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxn += (x[i] - mx) * (noise[i] - mn);
    }
    std::vector<double> ortho(12);
    double soo = 0;
    for (int i = 0; i < 12; ++i) {
        ortho[i] = (noise[i] - mn) - sxn / sxx * (x[i] - mx);
        soo += ortho[i] * ortho[i];
    }
    const double r_target = 0.6;
    for (int i = 0; i < 12; ++i) {
        y.push_back(r_target * (x[i] - mx) / std::sqrt(sxx) +
                    std::sqrt(1 - r_target * r_target) * ortho[i] / std::sqrt(soo));
    }
    const auto res = pearson(x, y);
    CHECK(std::abs(res.r - 0.6) < 1e-12);
    CHECK(res.p_value == doctest::Approx(0.0390).epsilon(0.02));
    CHECK(res.stars == "*");
}

TEST_CASE("significance stars") {
    CHECK(significance_stars(0.0005) == "***");
    CHECK(significance_stars(0.005) == "**");
    CHECK(significance_stars(0.03) == "*");
    CHECK(significance_stars(0.06) == "");
    CHECK(significance_stars(0.05) == "");
    CHECK(significance_stars(0.01) == "*");
    CHECK(significance_stars(0.001) == "**");
}
