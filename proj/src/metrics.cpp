#include "sudx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "sudx/errors.hpp"
#include "sudx/text.hpp"

namespace sudx {

namespace {

std::vector<std::string> score_tokens(const std::string& s) {
    const std::string norm = normalize_text(s);
    if (norm == kSentinel) return {};
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < norm.size()) {
        std::size_t j = norm.find(' ', i);
        if (j == std::string::npos) j = norm.size();
        out.push_back(norm.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

}  // namespace

int strict_score(const std::string& pred, const std::string& gold) {
    return normalize_text(pred) == normalize_text(gold) ? 1 : 0;
}

RelaxedScores relaxed_scores(const std::string& pred, const std::string& gold) {
    std::map<std::string, std::size_t> pred_bag, gold_bag;
    std::size_t pred_total = 0, gold_total = 0;
    for (auto& t : score_tokens(pred)) {
        pred_bag[t]++;
        ++pred_total;
    }
    for (auto& t : score_tokens(gold)) {
        gold_bag[t]++;
        ++gold_total;
    }

    RelaxedScores s;
    if (pred_total == 0 && gold_total == 0) {
        // Two empty bags only count as agreement when the strings agree too;
        // the sentinel matches the sentinel, but an empty prediction against
        // the sentinel is a miss.
        const double v = normalize_text(pred) == normalize_text(gold) ? 1.0 : 0.0;
        s.precision = s.recall = s.f1 = v;
        return s;
    }
    for (const auto& [tok, n] : pred_bag) {
        auto it = gold_bag.find(tok);
        if (it != gold_bag.end()) s.tp += std::min(n, it->second);
    }
    s.fp = pred_total - s.tp;
    s.fn = gold_total - s.tp;
    s.precision = pred_total == 0 ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(pred_total);
    s.recall = gold_total == 0 ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(gold_total);
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

SampleScore score_sample(const std::string& note_id, SUDCategory category,
                         const std::string& pred, const std::string& gold) {
    SampleScore out;
    out.note_id = note_id;
    out.category = category;
    out.strict = strict_score(pred, gold);
    const RelaxedScores r = relaxed_scores(pred, gold);
    out.relaxed_precision = r.precision;
    out.relaxed_recall = r.recall;
    out.relaxed_f1 = r.f1;
    out.tp = r.tp;
    out.fp = r.fp;
    out.fn = r.fn;
    return out;
}

std::optional<CohortStats> macro_average(const std::vector<SampleScore>& samples) {
    if (samples.empty()) return std::nullopt;
    CohortStats st;
    st.n = samples.size();
    for (const auto& s : samples) {
        st.strict_f1 += s.strict;
        st.relaxed_precision += s.relaxed_precision;
        st.relaxed_recall += s.relaxed_recall;
        st.relaxed_f1 += s.relaxed_f1;
    }
    const double n = static_cast<double>(st.n);
    st.strict_f1 /= n;
    st.relaxed_precision /= n;
    st.relaxed_recall /= n;
    st.relaxed_f1 /= n;
    return st;
}

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw ValidationError("pearson: need at least 3 samples");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValidationError("pearson: undefined correlation (zero variance)");
    }

    CorrelationResult res;
    res.n = n;
    res.r = sxy / std::sqrt(sxx * syy);
    res.r = std::clamp(res.r, -1.0, 1.0);

    const double df = static_cast<double>(n - 2);
    if (std::abs(res.r) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
        boost::math::students_t dist(df);
        res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    res.stars = significance_stars(res.p_value);
    return res;
}

std::string significance_stars(double p_value) {
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    return "";
}

}  // namespace sudx
