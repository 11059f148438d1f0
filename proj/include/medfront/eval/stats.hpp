#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "medfront/datasets/types.hpp"

namespace medfront::eval {

enum class McNemarMethod { kExact, kChi2Cc };

struct McNemarResult {
  std::size_t b = 0;  // first classifier correct, second wrong
  std::size_t c = 0;  // first classifier wrong, second correct
  double statistic = 0.0;
  double p_value = 1.0;
  McNemarMethod method = McNemarMethod::kExact;
};

// Two-sided exact binomial p = min(1, 2 * P(X <= min(b,c) | n = b+c, 1/2));
// b + c = 0 gives p = 1.
double mcnemar_exact_p(std::size_t b, std::size_t c);

// Continuity-corrected chi-squared: statistic = max(|b-c|-1, 0)^2 / (b+c),
// p from the chi-squared(1) upper tail.
double mcnemar_chi2_p(std::size_t b, std::size_t c);

// Exact test below b + c = 25 discordant pairs, chi-squared above.
McNemarResult mcnemar_counts(std::size_t b, std::size_t c);

// Discordance of two prediction vectors against the truth; throws
// std::invalid_argument on length mismatch.
McNemarResult mcnemar(const std::vector<datasets::Label>& preds_a,
                      const std::vector<datasets::Label>& preds_b,
                      const std::vector<datasets::Label>& truth);

// Bonferroni-Holm step-down: sort ascending, adjusted_(i) = max over j <= i
// of min(1, (m - j + 1) * p_(j)), returned in the input order.
std::vector<double> holm_correct(const std::vector<double>& p_values);

struct PairComparison {
  std::string pair;  // e.g. "Mel-LEAF"
  McNemarResult result;
  double p_holm = 1.0;
  bool significant = false;  // adjusted p < 0.05
};

struct ComparisonReport {
  std::array<PairComparison, 3> pairs;  // Mel-LEAF, Mel-nnAudio, LEAF-nnAudio
};

// Pairwise McNemar over the three frontends' predictions on one test set,
// Holm-corrected as a family of three.
ComparisonReport compare_frontends(
    const std::vector<datasets::Label>& preds_mel,
    const std::vector<datasets::Label>& preds_leaf,
    const std::vector<datasets::Label>& preds_nnaudio,
    const std::vector<datasets::Label>& truth);

// 4 significant digits; scientific notation below 1e-3.
std::string format_p_value(double p);

// CSV: pair,b,c,statistic,p_raw,p_holm,significant (with header).
std::string comparison_csv(const ComparisonReport& report);

// Aligned human-readable table of the same rows.
std::string comparison_table(const ComparisonReport& report);

}  // namespace medfront::eval
