#include "medfront/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace medfront::eval {

ConfusionCounts count_confusion(const std::vector<datasets::Label>& predicted,
                                const std::vector<datasets::Label>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument(
        "count_confusion: " + std::to_string(predicted.size()) +
        " predictions vs " + std::to_string(truth.size()) + " truth labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == datasets::Label::kAbnormal;
    const bool called = predicted[i] == datasets::Label::kAbnormal;
    if (actual) {
      ++(called ? c.tp : c.fn);
    } else {
      ++(called ? c.fp : c.tn);
    }
  }
  return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) {
    throw std::invalid_argument(
        "compute_metrics: no positive (abnormal) cases; TPR is undefined");
  }
  if (c.tn + c.fp == 0) {
    throw std::invalid_argument(
        "compute_metrics: no negative (normal) cases; TNR is undefined");
  }
  Metrics m;
  m.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  m.balanced_accuracy = 0.5 * (m.tpr + m.tnr);
  return m;
}

std::string format_percent(double fraction) {
  // The nudge makes exact x.xx5 values render as x.xx rather than riding
  // printf's round-half-even; it is far below the two shown decimals.
  const double nudged = std::max(fraction * 100.0 - 1e-9, 0.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", nudged);
  return buf;
}

}  // namespace medfront::eval
