#pragma once

#include <string>

#include "medfront/frontends/frontend.hpp"
#include "medfront/frontends/mel.hpp"

namespace medfront::frontends {

struct FeatureFile {
  FrontendKind kind = FrontendKind::kMel;
  FeatureMap map;  // channel_center_hz is not persisted
};

// Binary dump: magic "MFFT", version u32, frontend tag u8, frames u32,
// channels u32, frame_rate f64, then row-major (frame x channel) f32 data.
// All integers and floats little-endian.
void write_feature_file(const std::string& path, const FeatureMap& map,
                        FrontendKind kind);
FeatureFile read_feature_file(const std::string& path);

// Binary PGM (P5, 255 levels) of the map, min-max normalized per image.
// Time runs left to right, channel 0 is the bottom row. A constant map
// renders as all black.
void write_feature_pgm(const std::string& path, const FeatureMap& map);

}  // namespace medfront::frontends
