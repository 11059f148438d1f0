#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/frontends/frontend.hpp"
#include "medfront/frontends/mel.hpp"

namespace medfront::frontends {

// Learnable spectrogram state: a windowed DFT basis split into its cosine
// and sine parts plus the mel combination matrix. All three start at the
// values the fixed frontend uses, so at initialization the two frontends
// produce identical features.
struct NnAudioParams {
  autodiff::Tensor cos_bank;     // (bins x window_samples)
  autodiff::Tensor sin_bank;     // (bins x window_samples)
  autodiff::Tensor mel_weights;  // (n_filters x bins)

  std::vector<std::pair<std::string, autodiff::Tensor>> named() const;
};

// cos_bank[k][i] = win[i] cos(2 pi k i / n_fft), sin_bank likewise with sin,
// win the periodic Hann window; mel_weights copies the fixed filterbank.
NnAudioParams init_nnaudio(const FrontendConfig& cfg);

// Learnable STFT basis + learnable mel matrix, log compressed.
class NnAudioFrontend : public Frontend {
 public:
  explicit NnAudioFrontend(const FrontendConfig& cfg);

  FrontendKind kind() const override { return FrontendKind::kNnAudio; }
  autodiff::Tensor forward(autodiff::Tape& tape,
                           const signal::Waveform& w) override;
  std::vector<std::pair<std::string, autodiff::Tensor>> parameters()
      const override {
    return params_.named();
  }
  void clamp_parameters() override {}
  std::vector<double> channel_centers() const override { return centers_; }

  NnAudioParams& params() { return params_; }

 private:
  NnAudioParams params_;
  std::vector<double> centers_;
};

}  // namespace medfront::frontends
