#include "medfront/frontends/frontend.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "medfront/autodiff/ops.hpp"
#include "medfront/frontends/nnaudio.hpp"

namespace medfront::frontends {

namespace ops = autodiff::ops;

std::string frontend_name(FrontendKind kind) {
  switch (kind) {
    case FrontendKind::kMel:
      return "mel";
    case FrontendKind::kLeaf:
      return "leaf";
    case FrontendKind::kNnAudio:
      return "nnaudio";
  }
  throw std::invalid_argument("frontend_name: unknown frontend tag " +
                              std::to_string(static_cast<int>(kind)));
}

FrontendKind frontend_from_name(const std::string& name) {
  if (name == "mel") return FrontendKind::kMel;
  if (name == "leaf") return FrontendKind::kLeaf;
  if (name == "nnaudio") return FrontendKind::kNnAudio;
  throw std::invalid_argument("frontend_from_name: unknown frontend '" +
                              name + "' (expected mel, leaf, or nnaudio)");
}

Frontend::Frontend(FrontendConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

void Frontend::require_compatible(const signal::Waveform& w) const {
  if (w.sample_rate != cfg_.sample_rate) {
    throw std::invalid_argument(
        "frontend: waveform at " + std::to_string(w.sample_rate) +
        " Hz does not match configured " + std::to_string(cfg_.sample_rate) +
        " Hz");
  }
  if (w.samples.size() < cfg_.window_samples()) {
    throw std::invalid_argument(
        "frontend: waveform of " + std::to_string(w.samples.size()) +
        " samples is shorter than one " +
        std::to_string(cfg_.window_samples()) + "-sample analysis window");
  }
}

FeatureMap Frontend::extract(const signal::Waveform& w) {
  autodiff::Tape tape;
  autodiff::NoGradGuard guard(tape);
  autodiff::Tensor out = forward(tape, w);
  FeatureMap map;
  map.frames = out.shape()[0];
  map.channels = out.shape()[1];
  map.data = out.values();
  map.frame_rate = static_cast<double>(cfg_.sample_rate) /
                   static_cast<double>(cfg_.hop_samples());
  map.channel_center_hz = channel_centers();
  return map;
}

std::unique_ptr<Frontend> make_frontend(FrontendKind kind,
                                        const FrontendConfig& cfg) {
  switch (kind) {
    case FrontendKind::kMel:
      return std::make_unique<MelFrontend>(cfg);
    case FrontendKind::kLeaf:
      return std::make_unique<LeafFrontend>(cfg);
    case FrontendKind::kNnAudio:
      return std::make_unique<NnAudioFrontend>(cfg);
  }
  throw std::invalid_argument("make_frontend: unknown frontend tag " +
                              std::to_string(static_cast<int>(kind)));
}

MelFrontend::MelFrontend(const FrontendConfig& cfg) : Frontend(cfg) {
  centers_ = mel_filterbank_matrix(cfg_, cfg_.fft_size()).center_hz;
}

autodiff::Tensor MelFrontend::forward(autodiff::Tape& tape,
                                      const signal::Waveform& w) {
  (void)tape;  // nothing learnable: the output is a constant
  require_compatible(w);
  FeatureMap map = mel_frontend(w, cfg_);
  return autodiff::Tensor::from_values({map.frames, map.channels},
                                       std::move(map.data));
}

LeafFrontend::LeafFrontend(const FrontendConfig& cfg)
    : Frontend(cfg), params_(init_leaf(cfg_)) {}

autodiff::Tensor LeafFrontend::forward(autodiff::Tape& tape,
                                       const signal::Waveform& w) {
  require_compatible(w);
  autodiff::Tensor power =
      gabor_conv_power(tape, w.samples, params_.center_hz, params_.bandwidth,
                       cfg_.gabor_length, cfg_.sample_rate);
  autodiff::Tensor pooled =
      gaussian_pool(tape, power, params_.pool_width, cfg_.window_samples(),
                    cfg_.hop_samples());
  autodiff::Tensor compressed;
  if (cfg_.compression == Compression::kPcen) {
    compressed = pcen(tape, pooled, params_.pcen_alpha, params_.pcen_delta,
                      params_.pcen_root, params_.pcen_s, params_.pcen_eps);
  } else {
    compressed = ops::log_eps(tape, pooled, cfg_.log_eps);
  }
  return ops::transpose(tape, compressed);
}

std::vector<std::pair<std::string, autodiff::Tensor>>
LeafFrontend::parameters() const {
  auto all = params_.named();
  if (cfg_.compression == Compression::kPcen) return all;
  // With log compression the PCEN tensors never receive gradients, so they
  // are not handed to the optimizer.
  std::vector<std::pair<std::string, autodiff::Tensor>> used;
  for (auto& kv : all) {
    if (kv.first.rfind("leaf.pcen_", 0) != 0) used.push_back(std::move(kv));
  }
  return used;
}

}  // namespace medfront::frontends
