#include "medfront/frontends/mel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "medfront/signal/fft.hpp"
#include "medfront/signal/stft.hpp"

namespace medfront::frontends {

std::size_t FrontendConfig::window_samples() const {
  return static_cast<std::size_t>(
      std::llround(window_ms * sample_rate / 1000.0));
}

std::size_t FrontendConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

std::size_t FrontendConfig::fft_size() const {
  return n_fft != 0 ? n_fft : signal::next_power_of_two(window_samples());
}

std::size_t FrontendConfig::frames_for(std::size_t n_samples) const {
  return 1 + (n_samples - window_samples()) / hop_samples();
}

void FrontendConfig::validate() const {
  if (sample_rate <= 0) {
    throw std::invalid_argument("frontend config: sample_rate must be > 0");
  }
  if (n_filters < 1) {
    throw std::invalid_argument("frontend config: n_filters must be >= 1");
  }
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) ||
      !(fmax_hz <= sample_rate / 2.0)) {
    throw std::invalid_argument(
        "frontend config: need 0 <= fmin < fmax <= sample_rate/2, got [" +
        std::to_string(fmin_hz) + ", " + std::to_string(fmax_hz) + "] at " +
        std::to_string(sample_rate) + " Hz");
  }
  if (window_samples() < 1 || hop_samples() < 1) {
    throw std::invalid_argument(
        "frontend config: window and hop must be at least one sample");
  }
  if (fft_size() < window_samples()) {
    throw std::invalid_argument("frontend config: n_fft " +
                                std::to_string(fft_size()) +
                                " smaller than the window");
  }
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

std::vector<double> mel_points(const FrontendConfig& cfg) {
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  const std::size_t n = cfg.n_filters + 2;
  std::vector<double> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m =
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                     static_cast<double>(n - 1);
    points[i] = mel_to_hz(m);
  }
  points.front() = cfg.fmin_hz;
  points.back() = cfg.fmax_hz;
  return points;
}

MelFilterbank mel_filterbank_matrix(const FrontendConfig& cfg,
                                    std::size_t n_fft) {
  cfg.validate();
  const std::size_t bins = n_fft / 2 + 1;
  const auto points = mel_points(cfg);
  MelFilterbank fb;
  fb.weights = autodiff::Tensor::zeros({cfg.n_filters, bins});
  fb.center_hz.resize(cfg.n_filters);
  fb.base_width_hz.resize(cfg.n_filters);
  auto& w = fb.weights.values();
  for (std::size_t m = 0; m < cfg.n_filters; ++m) {
    const double left = points[m];
    const double center = points[m + 1];
    const double right = points[m + 2];
    fb.center_hz[m] = center;
    fb.base_width_hz[m] = right - left;
    bool any = false;
    for (std::size_t b = 0; b < bins; ++b) {
      const double f =
          static_cast<double>(b) * cfg.sample_rate / static_cast<double>(n_fft);
      double v = 0.0;
      if (f > left && f < center) {
        v = (f - left) / (center - left);
      } else if (f == center) {
        v = 1.0;
      } else if (f > center && f < right) {
        v = (right - f) / (right - center);
      }
      if (v > 0.0) any = true;
      w[m * bins + b] = v;
    }
    if (!any) ++fb.zero_rows;
  }
  return fb;
}

FeatureMap mel_frontend(const signal::Waveform& w, const FrontendConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw std::invalid_argument(
        "mel_frontend: waveform at " + std::to_string(w.sample_rate) +
        " Hz does not match config " + std::to_string(cfg.sample_rate) +
        " Hz");
  }
  const std::size_t n_fft = cfg.fft_size();
  const auto spec = signal::stft(w, cfg.window_ms, cfg.hop_ms,
                                 signal::WindowKind::kHann, n_fft);
  const auto fb = mel_filterbank_matrix(cfg, n_fft);
  const auto& mel = fb.weights.values();

  FeatureMap out;
  out.frames = spec.frames;
  out.channels = cfg.n_filters;
  out.frame_rate = static_cast<double>(cfg.sample_rate) /
                   static_cast<double>(cfg.hop_samples());
  out.channel_center_hz = fb.center_hz;
  out.data.assign(spec.frames * cfg.n_filters, 0.0);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t m = 0; m < cfg.n_filters; ++m) {
      double acc = 0.0;
      for (std::size_t b = 0; b < spec.bins; ++b) {
        const double wmb = mel[m * spec.bins + b];
        if (wmb == 0.0) continue;
        acc += wmb * std::norm(spec.at(f, b));
      }
      out.data[f * cfg.n_filters + m] = std::log(acc + cfg.log_eps);
    }
  }
  return out;
}

}  // namespace medfront::frontends
