#pragma once

#include <vector>

#include "medfront/datasets/types.hpp"
#include "medfront/signal/waveform.hpp"

namespace medfront::datasets {

// One clip per annotation, labeled normal iff neither crackles nor wheezes.
// Annotations overhanging the recording are clipped (or skipped when fully
// outside) with a warning recorded instead of an error.
Segmentation segment_by_cycles(const signal::Waveform& w,
                               const std::vector<CycleAnnotation>& anns);

// Consecutive non-overlapping chunks of chunk_s seconds, all inheriting the
// recording-level label. A final remainder shorter than chunk_s is kept;
// duration normalization happens downstream.
Segmentation segment_fixed(const signal::Waveform& w, Label label,
                           double chunk_s = 2.0);

}  // namespace medfront::datasets
