#pragma once

#include <cstddef>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/signal/waveform.hpp"

namespace medfront::frontends {

enum class Compression { kLog, kPcen };

// Analysis parameters shared by all three frontends. `compression` selects
// the learnable LEAF compressor only; the fixed and nnAudio frontends always
// log-compress.
struct FrontendConfig {
  double window_ms = 30.0;
  double hop_ms = 10.0;
  std::size_t n_filters = 128;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  int sample_rate = 0;
  Compression compression = Compression::kPcen;
  std::size_t n_fft = 0;  // 0 = next power of two >= window samples
  double log_eps = 1e-6;

  // LEAF-specific knobs.
  std::size_t gabor_length = 401;
  double pcen_alpha = 2.0;
  double pcen_delta = 2.0;
  double pcen_root = 4.0;
  double pcen_s = 0.04;
  double pcen_eps = 1e-6;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  std::size_t fft_size() const;
  std::size_t fft_bins() const { return fft_size() / 2 + 1; }
  std::size_t frames_for(std::size_t n_samples) const;

  // Enforces 0 <= fmin < fmax <= sample_rate/2, n_filters >= 1, and
  // window/hop of at least one sample.
  void validate() const;
};

// Time x channel output of any frontend.
struct FeatureMap {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::vector<double> data;  // row-major frame x channel
  double frame_rate = 0.0;
  std::vector<double> channel_center_hz;

  double at(std::size_t frame, std::size_t channel) const {
    return data[frame * channels + channel];
  }
};

// HTK mel scale: m = 2595 log10(1 + f/700). Exact inverses of each other.
double hz_to_mel(double f);
double mel_to_hz(double m);

// n_filters + 2 frequencies equally spaced in mel between fmin and fmax
// (first = fmin, last = fmax); triangle i peaks at point i+1.
std::vector<double> mel_points(const FrontendConfig& cfg);

struct MelFilterbank {
  autodiff::Tensor weights;            // (n_filters x bins), peak height 1
  std::vector<double> center_hz;       // triangle peaks
  std::vector<double> base_width_hz;   // triangle support widths
  std::size_t zero_rows = 0;           // filters narrower than a bin
};

MelFilterbank mel_filterbank_matrix(const FrontendConfig& cfg,
                                    std::size_t n_fft);

// Fixed frontend: log(M |STFT|^2 + eps). Non-learnable.
FeatureMap mel_frontend(const signal::Waveform& w, const FrontendConfig& cfg);

}  // namespace medfront::frontends
