#pragma once

#include <string>
#include <vector>

namespace medfront::signal {

// Mono audio with its sample rate; the unit flowing through preprocessing.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_id;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Throws NumericError if any sample is NaN/Inf. `op` names the producer.
void check_finite(const Waveform& w, const char* op);

// Truncates at the end or zero-pads at the end so the output lasts exactly
// target_s seconds (round(target_s * sample_rate) samples).
Waveform fit_duration(const Waveform& w, double target_s);

}  // namespace medfront::signal
