#include "medfront/frontends/nnaudio.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "medfront/autodiff/ops.hpp"
#include "medfront/signal/stft.hpp"

namespace medfront::frontends {

namespace ops = autodiff::ops;
using autodiff::Tensor;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<std::pair<std::string, Tensor>> NnAudioParams::named() const {
  return {{"nnaudio.cos_bank", cos_bank},
          {"nnaudio.sin_bank", sin_bank},
          {"nnaudio.mel_weights", mel_weights}};
}

NnAudioParams init_nnaudio(const FrontendConfig& cfg) {
  cfg.validate();
  const std::size_t win = cfg.window_samples();
  const std::size_t n_fft = cfg.fft_size();
  const std::size_t bins = cfg.fft_bins();
  const auto window = signal::make_window(signal::WindowKind::kHann, win);

  NnAudioParams p;
  p.cos_bank = Tensor::zeros({bins, win}, true);
  p.sin_bank = Tensor::zeros({bins, win}, true);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t i = 0; i < win; ++i) {
      const double phase = 2.0 * kPi * static_cast<double>(k) *
                           static_cast<double>(i) /
                           static_cast<double>(n_fft);
      p.cos_bank.values()[k * win + i] = window[i] * std::cos(phase);
      p.sin_bank.values()[k * win + i] = window[i] * std::sin(phase);
    }
  }
  p.mel_weights = Tensor::from_values(
      {cfg.n_filters, bins}, mel_filterbank_matrix(cfg, n_fft).weights.values(),
      true);
  return p;
}

NnAudioFrontend::NnAudioFrontend(const FrontendConfig& cfg)
    : Frontend(cfg), params_(init_nnaudio(cfg_)) {
  centers_ = mel_filterbank_matrix(cfg_, cfg_.fft_size()).center_hz;
}

autodiff::Tensor NnAudioFrontend::forward(autodiff::Tape& tape,
                                          const signal::Waveform& w) {
  require_compatible(w);
  const std::size_t win = cfg_.window_samples();
  const std::size_t hop = cfg_.hop_samples();
  const std::size_t frames = cfg_.frames_for(w.samples.size());

  std::vector<double> framed(frames * win);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < win; ++i) {
      framed[f * win + i] = w.samples[f * hop + i];
    }
  }
  Tensor x = Tensor::from_values({frames, win}, std::move(framed));

  Tensor re = ops::matmul(tape, x, ops::transpose(tape, params_.cos_bank));
  Tensor im = ops::matmul(tape, x, ops::transpose(tape, params_.sin_bank));
  Tensor power =
      ops::add(tape, ops::mul(tape, re, re), ops::mul(tape, im, im));
  Tensor mel =
      ops::matmul(tape, power, ops::transpose(tape, params_.mel_weights));
  // The learnable mel matrix can drift negative; clamp keeps the log happy.
  return ops::log_eps(tape, ops::relu(tape, mel), cfg_.log_eps);
}

}  // namespace medfront::frontends
