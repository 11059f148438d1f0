#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "medfront/datasets/types.hpp"

namespace medfront::datasets {

// Deterministic stratified split. Segments are shuffled per class with the
// seeded generator; per-class partition counts follow largest-remainder
// rounding of count * fraction, with remainder ties broken toward the
// globally most underfilled partition (then train < val < test). Per-class
// counts land within one segment of their fraction targets.
//
// group_by_patient instead assigns whole patient groups (empty patient ids
// stay singleton groups) to the partition furthest below its size target;
// fractions then hold only approximately, trading exactness for zero
// patient leakage across partitions.
//
// Requires >= 10 segments, fractions summing to 1, and at least one segment
// of each class; violations throw std::invalid_argument.
SplitManifest make_split(const std::vector<ManifestEntry>& entries,
                         std::uint64_t seed,
                         const std::array<double, 3>& fractions = {0.75, 0.15,
                                                                   0.10},
                         bool group_by_patient = false);

// counts[label][partition] over the manifest entries.
std::array<std::array<std::size_t, 3>, 2> split_counts(const SplitManifest& m);

}  // namespace medfront::datasets
