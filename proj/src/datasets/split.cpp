#include "medfront/datasets/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "medfront/autodiff/rng.hpp"

namespace medfront::datasets {

namespace {

using autodiff::Rng;

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

// Largest-remainder apportionment of n over the three fractions. Remainder
// ties go to the partition whose global count is furthest below its global
// target, then to the earliest partition.
std::array<std::size_t, 3> apportion(std::size_t n,
                                     const std::array<double, 3>& fractions,
                                     const std::array<double, 3>& global_target,
                                     std::array<std::size_t, 3>& global_count) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int p = 0; p < 3; ++p) {
    const double quota = static_cast<double>(n) * fractions[p];
    counts[p] = static_cast<std::size_t>(std::floor(quota));
    remainder[p] = quota - static_cast<double>(counts[p]);
    assigned += counts[p];
    global_count[p] += counts[p];
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    const double deficit_a =
        global_target[a] - static_cast<double>(global_count[a]);
    const double deficit_b =
        global_target[b] - static_cast<double>(global_count[b]);
    if (deficit_a != deficit_b) return deficit_a > deficit_b;
    return a < b;
  });
  for (std::size_t extra = 0; extra < n - assigned; ++extra) {
    ++counts[order[extra]];
    ++global_count[order[extra]];
  }
  return counts;
}

void validate(const std::vector<ManifestEntry>& entries,
              const std::array<double, 3>& fractions) {
  if (entries.size() < 10) {
    throw std::invalid_argument("make_split: need at least 10 segments, got " +
                                std::to_string(entries.size()));
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) {
      throw std::invalid_argument("make_split: negative fraction");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("make_split: fractions sum to " +
                                std::to_string(sum) + ", expected 1");
  }
  std::array<std::size_t, 2> class_count{};
  for (const auto& e : entries) ++class_count[static_cast<int>(e.label)];
  for (int c = 0; c < 2; ++c) {
    if (class_count[c] == 0) {
      throw std::invalid_argument(
          "make_split: class '" + label_name(static_cast<Label>(c)) +
          "' has no segments; stratification is impossible");
    }
  }
}

SplitManifest split_stratified(const std::vector<ManifestEntry>& entries,
                               std::uint64_t seed,
                               const std::array<double, 3>& fractions) {
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.fractions = fractions;
  manifest.entries = entries;

  const std::array<double, 3> global_target{
      static_cast<double>(entries.size()) * fractions[0],
      static_cast<double>(entries.size()) * fractions[1],
      static_cast<double>(entries.size()) * fractions[2]};
  std::array<std::size_t, 3> global_count{};

  Rng rng(seed);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (static_cast<int>(entries[i].label) == c) idx.push_back(i);
    }
    shuffle_indices(idx, rng);
    const auto counts =
        apportion(idx.size(), fractions, global_target, global_count);
    std::size_t cursor = 0;
    for (int p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k < counts[p]; ++k, ++cursor) {
        manifest.entries[idx[cursor]].partition = static_cast<Partition>(p);
      }
    }
  }
  return manifest;
}

SplitManifest split_by_patient(const std::vector<ManifestEntry>& entries,
                               std::uint64_t seed,
                               const std::array<double, 3>& fractions) {
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.fractions = fractions;
  manifest.entries = entries;

  // Groups in first-appearance order so the shuffle is reproducible.
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& pid = entries[i].patient_id;
    if (pid.empty()) {
      groups.push_back({i});
      continue;
    }
    const auto [it, fresh] = group_of.emplace(pid, groups.size());
    if (fresh) groups.push_back({});
    groups[it->second].push_back(i);
  }

  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  shuffle_indices(order, rng);

  const std::array<double, 3> target{
      static_cast<double>(entries.size()) * fractions[0],
      static_cast<double>(entries.size()) * fractions[1],
      static_cast<double>(entries.size()) * fractions[2]};
  std::array<double, 3> assigned{};
  for (std::size_t g : order) {
    int best = 0;
    double best_deficit = target[0] - assigned[0];
    for (int p = 1; p < 3; ++p) {
      const double deficit = target[p] - assigned[p];
      if (deficit > best_deficit) {
        best = p;
        best_deficit = deficit;
      }
    }
    for (std::size_t i : groups[g]) {
      manifest.entries[i].partition = static_cast<Partition>(best);
    }
    assigned[best] += static_cast<double>(groups[g].size());
  }
  return manifest;
}

}  // namespace

SplitManifest make_split(const std::vector<ManifestEntry>& entries,
                         std::uint64_t seed,
                         const std::array<double, 3>& fractions,
                         bool group_by_patient) {
  validate(entries, fractions);
  return group_by_patient ? split_by_patient(entries, seed, fractions)
                          : split_stratified(entries, seed, fractions);
}

std::array<std::array<std::size_t, 3>, 2> split_counts(
    const SplitManifest& m) {
  std::array<std::array<std::size_t, 3>, 2> counts{};
  for (const auto& e : m.entries) {
    ++counts[static_cast<int>(e.label)][static_cast<int>(e.partition)];
  }
  return counts;
}

}  // namespace medfront::datasets
