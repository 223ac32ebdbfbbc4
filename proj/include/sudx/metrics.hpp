#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sudx/category.hpp"

namespace sudx {

/// Token-overlap scores for one (note, category) sample.
struct SampleScore {
    std::string note_id;
    SUDCategory category = SUDCategory::Alcohol;
    int strict = 0;
    double relaxed_precision = 0.0;
    double relaxed_recall = 0.0;
    double relaxed_f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

struct RelaxedScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

/// 1 iff prediction and gold are identical after scoring normalization.
/// The sentinel only matches itself.
int strict_score(const std::string& pred, const std::string& gold);

/// Bag-of-tokens overlap. tp counts tokens common to both (multiset
/// intersection), fn tokens only in gold, fp tokens only in the prediction.
/// The sentinel contributes an empty token bag; two empty bags score 1.0,
/// one empty bag scores 0.0.
RelaxedScores relaxed_scores(const std::string& pred, const std::string& gold);

SampleScore score_sample(const std::string& note_id, SUDCategory category,
                         const std::string& pred, const std::string& gold);

/// Unweighted means over a list of samples (macro averaging).
struct CohortStats {
    std::size_t n = 0;
    double strict_f1 = 0.0;
    double relaxed_precision = 0.0;
    double relaxed_recall = 0.0;
    double relaxed_f1 = 0.0;
};

/// Means over the given samples; nullopt for an empty list (a cohort with no
/// samples is reported as absent, not zero).
std::optional<CohortStats> macro_average(const std::vector<SampleScore>& samples);

/// Per-category histogram of candidate counts, restricted to counts > 1.
using CandidateHistogram = std::map<std::size_t, std::size_t>;

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::string stars;  // "***", "**", "*" or ""
};

/// Product-moment correlation with a two-sided p-value from the Student-t
/// distribution with n-2 degrees of freedom. Throws ValidationError for
/// n < 3 or zero variance.
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y);

std::string significance_stars(double p_value);

}  // namespace sudx
