#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medfront/signal/waveform.hpp"

namespace medfront::datasets {

enum class WavFormat { kPcm16, kFloat32 };

// Parses a RIFF/WAVE container holding 16-bit PCM or 32-bit IEEE float.
// Multichannel input is averaged to mono; PCM is scaled by 1/32768.
// `name` labels the source in error messages. Malformed input throws
// DataError naming the byte offset.
signal::Waveform parse_wav(const std::vector<std::uint8_t>& bytes,
                           const std::string& name);

// parse_wav over a file's contents; source_id is set to the path.
signal::Waveform load_wav(const std::string& path);

// Minimal canonical writer (RIFF, fmt, data). PCM samples are scaled by
// 32768 and clamped to the 16-bit range.
void write_wav(const std::string& path, const signal::Waveform& w,
               WavFormat format);

}  // namespace medfront::datasets
