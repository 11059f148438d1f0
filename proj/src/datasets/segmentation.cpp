#include "medfront/datasets/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "medfront/datasets/annotations.hpp"

namespace medfront::datasets {

namespace {

signal::Waveform clip_samples(const signal::Waveform& w, std::size_t lo,
                              std::size_t hi) {
  signal::Waveform out;
  out.sample_rate = w.sample_rate;
  out.source_id = w.source_id;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(hi));
  return out;
}

}  // namespace

Segmentation segment_by_cycles(const signal::Waveform& w,
                               const std::vector<CycleAnnotation>& anns) {
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("segment_by_cycles: waveform has no sample rate");
  }
  Segmentation out;
  const std::size_t len = w.samples.size();
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const auto& ann = anns[i];
    const std::size_t lo = static_cast<std::size_t>(
        std::llround(ann.start_s * w.sample_rate));
    std::size_t hi =
        static_cast<std::size_t>(std::llround(ann.end_s * w.sample_rate));
    if (lo >= len) {
      out.warnings.push_back("segment_by_cycles: " + w.source_id + ": cycle " +
                             std::to_string(i + 1) + " [" +
                             std::to_string(ann.start_s) + ", " +
                             std::to_string(ann.end_s) +
                             "] starts past the end of the recording; skipped");
      continue;
    }
    if (hi > len) {
      out.warnings.push_back("segment_by_cycles: " + w.source_id + ": cycle " +
                             std::to_string(i + 1) + " overhangs by " +
                             std::to_string(static_cast<double>(hi - len) /
                                            w.sample_rate) +
                             " s; clipped");
      hi = len;
    }
    RawClip clip;
    clip.waveform = clip_samples(w, lo, hi);
    clip.label = cycle_label(ann);
    clip.start_s = ann.start_s;
    clip.end_s = std::min(ann.end_s, w.duration_s());
    out.clips.push_back(std::move(clip));
  }
  return out;
}

Segmentation segment_fixed(const signal::Waveform& w, Label label,
                           double chunk_s) {
  if (!(chunk_s > 0.0)) {
    throw std::invalid_argument("segment_fixed: chunk_s must be > 0, got " +
                                std::to_string(chunk_s));
  }
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("segment_fixed: waveform has no sample rate");
  }
  Segmentation out;
  const std::size_t len = w.samples.size();
  const std::size_t chunk =
      static_cast<std::size_t>(std::llround(chunk_s * w.sample_rate));
  for (std::size_t lo = 0; lo < len; lo += chunk) {
    const std::size_t hi = std::min(lo + chunk, len);
    RawClip clip;
    clip.waveform = clip_samples(w, lo, hi);
    clip.label = label;
    clip.start_s = static_cast<double>(lo) / w.sample_rate;
    clip.end_s = static_cast<double>(hi) / w.sample_rate;
    out.clips.push_back(std::move(clip));
  }
  return out;
}

}  // namespace medfront::datasets
