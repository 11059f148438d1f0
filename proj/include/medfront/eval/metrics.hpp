#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "medfront/datasets/types.hpp"

namespace medfront::eval {

// Positive class = abnormal: a missed disease is the false negative.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;

  std::size_t total() const { return tp + fn + tn + fp; }
};

ConfusionCounts count_confusion(const std::vector<datasets::Label>& predicted,
                                const std::vector<datasets::Label>& truth);

// All three as fractions in [0, 1].
struct Metrics {
  double balanced_accuracy = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
};

// balanced accuracy = (TPR + TNR) / 2. Throws std::invalid_argument when a
// class is empty (the mean of an undefined rate is undefined).
Metrics compute_metrics(const ConfusionCounts& counts);

// Fraction -> percent with two decimals, e.g. 0.80215 -> "80.21". Exact
// third-decimal ties round down (80.215 displays as 80.21, not 80.22).
std::string format_percent(double fraction);

}  // namespace medfront::eval
