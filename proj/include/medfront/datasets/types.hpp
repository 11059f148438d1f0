#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "medfront/signal/waveform.hpp"

namespace medfront::datasets {

enum class Label { kNormal = 0, kAbnormal = 1 };

std::string label_name(Label label);
Label label_from_name(const std::string& name);  // "normal" | "abnormal"

enum class Partition { kTrain = 0, kVal = 1, kTest = 2 };

std::string partition_name(Partition p);
Partition partition_from_name(const std::string& name);

// One respiratory cycle time mark from an annotation sidecar.
struct CycleAnnotation {
  double start_s = 0.0;
  double end_s = 0.0;
  bool crackles = false;
  bool wheezes = false;
};

// A labeled clip cut from a source recording, before preprocessing (still at
// the original sample rate, not yet duration-normalized).
struct RawClip {
  signal::Waveform waveform;
  Label label = Label::kNormal;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct Segmentation {
  std::vector<RawClip> clips;
  std::vector<std::string> warnings;
};

// A fully preprocessed training example: exactly the target duration at the
// target rate, with provenance back to the source region.
struct Segment {
  signal::Waveform waveform;
  Label label = Label::kNormal;
  std::string origin_file;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string patient_id;  // empty when unknown
};

// One manifest row; `segment_path` points at the preprocessed segment WAV.
struct ManifestEntry {
  std::string segment_path;
  Label label = Label::kNormal;
  Partition partition = Partition::kTrain;
  std::string origin_file;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string patient_id;
};

struct SplitManifest {
  std::uint64_t seed = 0;
  std::array<double, 3> fractions{0.75, 0.15, 0.10};  // train, val, test
  std::vector<ManifestEntry> entries;
};

}  // namespace medfront::datasets
