#include "medfront/signal/waveform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "medfront/errors.hpp"

namespace medfront::signal {

void check_finite(const Waveform& w, const char* op) {
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    if (!std::isfinite(w.samples[i])) {
      throw NumericError(std::string(op) + ": non-finite sample at index " +
                         std::to_string(i));
    }
  }
}

Waveform fit_duration(const Waveform& w, double target_s) {
  if (target_s <= 0.0) {
    throw std::invalid_argument("fit_duration: target_s must be > 0");
  }
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("fit_duration: sample_rate must be > 0");
  }
  const auto target_len =
      static_cast<std::size_t>(std::llround(target_s * w.sample_rate));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.source_id = w.source_id;
  out.samples.assign(target_len, 0.0);
  const std::size_t n = std::min(target_len, w.samples.size());
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = w.samples[i];
  return out;
}

}  // namespace medfront::signal
