#include "medfront/signal/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "medfront/signal/fft.hpp"

namespace medfront::signal {

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n == 0) return w;
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case WindowKind::kHann:
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / n);
      }
      break;
    case WindowKind::kHamming:
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.54 - 0.46 * std::cos(two_pi * static_cast<double>(i) / n);
      }
      break;
    case WindowKind::kRectangular:
      break;
  }
  return w;
}

ComplexSpectrum stft(const Waveform& w, double window_ms, double hop_ms,
                     WindowKind window_kind, std::size_t n_fft) {
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("stft: sample_rate must be > 0");
  }
  const auto window_samples = static_cast<std::size_t>(
      std::llround(window_ms * 1e-3 * w.sample_rate));
  const auto hop_samples =
      static_cast<std::size_t>(std::llround(hop_ms * 1e-3 * w.sample_rate));
  if (window_samples < 1 || hop_samples < 1) {
    throw std::invalid_argument(
        "stft: window and hop must be at least one sample at " +
        std::to_string(w.sample_rate) + " Hz");
  }
  if (n_fft < window_samples) {
    throw std::invalid_argument("stft: n_fft = " + std::to_string(n_fft) +
                                " is smaller than the window (" +
                                std::to_string(window_samples) + " samples)");
  }
  if (!is_power_of_two(n_fft)) {
    throw std::invalid_argument("stft: n_fft must be a power of two, got " +
                                std::to_string(n_fft));
  }
  if (w.samples.size() < window_samples) {
    throw std::invalid_argument(
        "stft: waveform shorter than one analysis window (" +
        std::to_string(w.samples.size()) + " < " +
        std::to_string(window_samples) + " samples); fit_duration first");
  }

  ComplexSpectrum out;
  out.n_fft = n_fft;
  out.hop_samples = hop_samples;
  out.window_samples = window_samples;
  out.bins = n_fft / 2 + 1;
  out.frames = 1 + (w.samples.size() - window_samples) / hop_samples;
  out.data.resize(out.frames * out.bins);

  const std::vector<double> window = make_window(window_kind, window_samples);
  std::vector<std::complex<double>> frame(n_fft);
  for (std::size_t f = 0; f < out.frames; ++f) {
    const std::size_t base = f * hop_samples;
    for (std::size_t i = 0; i < window_samples; ++i) {
      frame[i] = {w.samples[base + i] * window[i], 0.0};
    }
    for (std::size_t i = window_samples; i < n_fft; ++i) frame[i] = {0.0, 0.0};
    fft_inplace(frame, false);
    for (std::size_t b = 0; b < out.bins; ++b) {
      out.data[f * out.bins + b] = frame[b];
    }
  }
  return out;
}

}  // namespace medfront::signal
