#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "medfront/signal/waveform.hpp"

namespace medfront::signal {

enum class WindowKind { kHann, kHamming, kRectangular };

// Periodic analysis window of length n.
std::vector<double> make_window(WindowKind kind, std::size_t n);

// One-sided short-term spectrum: frames x (n_fft/2 + 1) complex bins.
struct ComplexSpectrum {
  std::size_t n_fft = 0;
  std::size_t hop_samples = 0;
  std::size_t window_samples = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;  // n_fft/2 + 1
  std::vector<std::complex<double>> data;  // row-major frame x bin

  const std::complex<double>& at(std::size_t frame, std::size_t bin) const {
    return data[frame * bins + bin];
  }
};

// Frames the waveform (full windows only; normalize duration upstream with
// fit_duration), applies the window, zero-pads each frame to n_fft and
// transforms. frames = 1 + (len - window_samples) / hop_samples.
ComplexSpectrum stft(const Waveform& w, double window_ms, double hop_ms,
                     WindowKind window_kind, std::size_t n_fft);

}  // namespace medfront::signal
