#include "medfront/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace medfront::eval {

namespace {

constexpr std::size_t kExactThreshold = 25;  // discordant pairs below: exact

bool correct(datasets::Label pred, datasets::Label truth) {
  return pred == truth;
}

std::string format_statistic(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", s);
  return buf;
}

}  // namespace

double mcnemar_exact_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  // Cumulative binomial tail at 1/2: sum_{j<=k} C(n,j) / 2^n, doubled.
  double coef = 1.0;
  double sum = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    // Multiply before dividing so the coefficients stay integer-exact.
    coef = coef * static_cast<double>(n - j + 1) / static_cast<double>(j);
    sum += coef;
  }
  return std::min(1.0, 2.0 * sum * std::pow(0.5, static_cast<double>(n)));
}

double mcnemar_chi2_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c));
  const double corrected = std::max(diff - 1.0, 0.0);
  const double statistic = corrected * corrected / static_cast<double>(n);
  // chi-squared(1) upper tail: P(X > s) = erfc(sqrt(s / 2)).
  return std::erfc(std::sqrt(statistic / 2.0));
}

McNemarResult mcnemar_counts(std::size_t b, std::size_t c) {
  McNemarResult r;
  r.b = b;
  r.c = c;
  if (b + c < kExactThreshold) {
    r.method = McNemarMethod::kExact;
    r.statistic = static_cast<double>(std::min(b, c));
    r.p_value = mcnemar_exact_p(b, c);
  } else {
    r.method = McNemarMethod::kChi2Cc;
    const double diff =
        std::abs(static_cast<double>(b) - static_cast<double>(c));
    const double corrected = std::max(diff - 1.0, 0.0);
    r.statistic = corrected * corrected / static_cast<double>(b + c);
    r.p_value = mcnemar_chi2_p(b, c);
  }
  return r;
}

McNemarResult mcnemar(const std::vector<datasets::Label>& preds_a,
                      const std::vector<datasets::Label>& preds_b,
                      const std::vector<datasets::Label>& truth) {
  if (preds_a.size() != truth.size() || preds_b.size() != truth.size()) {
    throw std::invalid_argument(
        "mcnemar: prediction vectors must match the truth length (" +
        std::to_string(preds_a.size()) + ", " + std::to_string(preds_b.size()) +
        " vs " + std::to_string(truth.size()) + ")");
  }
  std::size_t b = 0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool a_ok = correct(preds_a[i], truth[i]);
    const bool b_ok = correct(preds_b[i], truth[i]);
    if (a_ok && !b_ok) ++b;
    if (!a_ok && b_ok) ++c;
  }
  return mcnemar_counts(b, c);
}

std::vector<double> holm_correct(const std::vector<double>& p_values) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("holm_correct: p-value " +
                                  std::to_string(p) + " outside [0, 1]");
    }
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  std::vector<double> adjusted(m, 0.0);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double scaled =
        std::min(1.0, static_cast<double>(m - rank) * p_values[order[rank]]);
    running = std::max(running, scaled);
    adjusted[order[rank]] = running;
  }
  return adjusted;
}

ComparisonReport compare_frontends(
    const std::vector<datasets::Label>& preds_mel,
    const std::vector<datasets::Label>& preds_leaf,
    const std::vector<datasets::Label>& preds_nnaudio,
    const std::vector<datasets::Label>& truth) {
  ComparisonReport report;
  report.pairs[0].pair = "Mel-LEAF";
  report.pairs[0].result = mcnemar(preds_mel, preds_leaf, truth);
  report.pairs[1].pair = "Mel-nnAudio";
  report.pairs[1].result = mcnemar(preds_mel, preds_nnaudio, truth);
  report.pairs[2].pair = "LEAF-nnAudio";
  report.pairs[2].result = mcnemar(preds_leaf, preds_nnaudio, truth);

  const auto adjusted = holm_correct({report.pairs[0].result.p_value,
                                      report.pairs[1].result.p_value,
                                      report.pairs[2].result.p_value});
  for (std::size_t i = 0; i < 3; ++i) {
    report.pairs[i].p_holm = adjusted[i];
    report.pairs[i].significant = adjusted[i] < 0.05;
  }
  return report;
}

std::string format_p_value(double p) {
  char buf[32];
  if (p < 1e-3) {
    std::snprintf(buf, sizeof(buf), "%.3e", p);
  } else {
    std::snprintf(buf, sizeof(buf), "%.4g", p);
  }
  return buf;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out = "pair,b,c,statistic,p_raw,p_holm,significant\n";
  for (const auto& row : report.pairs) {
    out += row.pair + ',' + std::to_string(row.result.b) + ',' +
           std::to_string(row.result.c) + ',' +
           format_statistic(row.result.statistic) + ',' +
           format_p_value(row.result.p_value) + ',' +
           format_p_value(row.p_holm) + ',' + (row.significant ? "1" : "0") +
           '\n';
  }
  return out;
}

std::string comparison_table(const ComparisonReport& report) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %5s %5s %10s %11s %11s %12s\n",
                "pair", "b", "c", "statistic", "p_raw", "p_holm",
                "significant");
  std::string out = line;
  for (const auto& row : report.pairs) {
    std::snprintf(line, sizeof(line), "%-14s %5zu %5zu %10s %11s %11s %12s\n",
                  row.pair.c_str(), row.result.b, row.result.c,
                  format_statistic(row.result.statistic).c_str(),
                  format_p_value(row.result.p_value).c_str(),
                  format_p_value(row.p_holm).c_str(),
                  row.significant ? "yes" : "no");
    out += line;
  }
  return out;
}

}  // namespace medfront::eval
