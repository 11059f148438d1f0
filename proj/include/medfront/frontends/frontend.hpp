#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/frontends/leaf.hpp"
#include "medfront/frontends/mel.hpp"
#include "medfront/signal/waveform.hpp"

namespace medfront::frontends {

// Stable numeric tags; these go into feature dumps and checkpoints.
enum class FrontendKind { kMel = 0, kLeaf = 1, kNnAudio = 2 };

std::string frontend_name(FrontendKind kind);

// Accepts "mel", "leaf", "nnaudio"; throws invalid_argument otherwise.
FrontendKind frontend_from_name(const std::string& name);

// Common face of the three feature extractors. forward() builds a
// (frames x n_filters) tensor on the tape so gradients reach any learnable
// parameters; extract() is the no-grad convenience for dumping features.
class Frontend {
 public:
  explicit Frontend(FrontendConfig cfg);
  virtual ~Frontend() = default;

  virtual FrontendKind kind() const = 0;
  virtual autodiff::Tensor forward(autodiff::Tape& tape,
                                   const signal::Waveform& w) = 0;

  // Learnable tensors with their checkpoint names; empty for the fixed
  // frontend.
  virtual std::vector<std::pair<std::string, autodiff::Tensor>> parameters()
      const = 0;

  // Projects parameters back into their valid domain after an optimizer
  // step; no-op for the fixed frontend.
  virtual void clamp_parameters() = 0;

  // Current center frequency of each output channel, lowest first.
  virtual std::vector<double> channel_centers() const = 0;

  const FrontendConfig& config() const { return cfg_; }
  FeatureMap extract(const signal::Waveform& w);

 protected:
  // Throws invalid_argument unless the waveform matches the configured rate
  // and covers at least one analysis window.
  void require_compatible(const signal::Waveform& w) const;

  FrontendConfig cfg_;
};

std::unique_ptr<Frontend> make_frontend(FrontendKind kind,
                                        const FrontendConfig& cfg);

// Fixed log-mel filterbank; no learnable parameters.
class MelFrontend : public Frontend {
 public:
  explicit MelFrontend(const FrontendConfig& cfg);

  FrontendKind kind() const override { return FrontendKind::kMel; }
  autodiff::Tensor forward(autodiff::Tape& tape,
                           const signal::Waveform& w) override;
  std::vector<std::pair<std::string, autodiff::Tensor>> parameters()
      const override {
    return {};
  }
  void clamp_parameters() override {}
  std::vector<double> channel_centers() const override { return centers_; }

 private:
  std::vector<double> centers_;
};

// Gabor filterbank -> Gaussian pooling -> PCEN (or log), all learnable.
class LeafFrontend : public Frontend {
 public:
  explicit LeafFrontend(const FrontendConfig& cfg);

  FrontendKind kind() const override { return FrontendKind::kLeaf; }
  autodiff::Tensor forward(autodiff::Tape& tape,
                           const signal::Waveform& w) override;
  std::vector<std::pair<std::string, autodiff::Tensor>> parameters()
      const override;
  void clamp_parameters() override { params_.clamp(cfg_); }
  std::vector<double> channel_centers() const override {
    return params_.center_hz.values();
  }

  LeafParams& params() { return params_; }

 private:
  LeafParams params_;
};

}  // namespace medfront::frontends
