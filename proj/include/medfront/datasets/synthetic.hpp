#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "medfront/datasets/types.hpp"

namespace medfront::datasets {

// Seeded two-class corpus that exercises the whole pipeline without any
// external download: abnormal files carry Hann-windowed tone bursts at a
// per-file random frequency inside [fmin_hz, fmax_hz]; normal files carry
// bursts of Butterworth-bandpassed noise over the same band. The classes are
// separable by spectral concentration, so any of the frontends can learn it.
struct SyntheticSpec {
  std::size_t count = 1000;  // files; even indices abnormal, odd normal
  int sample_rate = 8000;
  double duration_s = 2.0;
  double fmin_hz = 25.0;
  double fmax_hz = 1000.0;
  std::uint64_t seed = 1;
};

// Writes synth_00000.wav ... (16-bit PCM) plus labels.csv into `dir` and
// returns (filename, label) pairs in index order. Same spec -> byte-identical
// files; each file's stream is derived from the seed and its index only, so
// the corpus does not depend on generation order.
std::vector<std::pair<std::string, Label>> generate_synthetic_corpus(
    const std::filesystem::path& dir, const SyntheticSpec& spec);

}  // namespace medfront::datasets
