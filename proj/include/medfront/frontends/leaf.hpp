#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"
#include "medfront/frontends/mel.hpp"
#include "medfront/signal/waveform.hpp"

namespace medfront::frontends {

// Learnable state of the LEAF-style frontend. bandwidth is the Gaussian
// envelope rate of each Gabor kernel (1/samples); pool_width is the sigma
// (samples) of each channel's Gaussian lowpass. clamp() keeps everything in
// its valid domain after an optimizer step.
struct LeafParams {
  autodiff::Tensor center_hz;   // (n_filters)
  autodiff::Tensor bandwidth;   // (n_filters), > 0
  autodiff::Tensor pool_width;  // (n_filters), > 0
  autodiff::Tensor pcen_alpha;  // (n_filters)
  autodiff::Tensor pcen_delta;  // (n_filters)
  autodiff::Tensor pcen_root;   // (n_filters)
  double pcen_s = 0.04;
  double pcen_eps = 1e-6;

  std::vector<std::pair<std::string, autodiff::Tensor>> named() const;
  void clamp(const FrontendConfig& cfg);
};

// Mel-matched initialization: centers at the mel triangle peaks, bandwidth
// chosen so each Gabor's spectral FWHM equals the matching triangle's base
// width, pooling sigma at a quarter of the analysis window, PCEN at the
// configured alpha/delta/root.
LeafParams init_leaf(const FrontendConfig& cfg);

// Complex Gabor kernel: Gaussian envelope exp(-(t*bandwidth)^2/2) times
// exp(i*2*pi*center_hz*t/sample_rate), t centered on the kernel.
std::vector<std::complex<double>> gabor_kernel(double center_hz,
                                               double bandwidth,
                                               std::size_t length,
                                               int sample_rate);

// Squared modulus of the "same"-length complex Gabor convolution of x with
// every filter: (n_filters x len). Differentiable in center_hz/bandwidth.
autodiff::Tensor gabor_conv_power(autodiff::Tape& tape,
                                  const std::vector<double>& x,
                                  const autodiff::Tensor& center_hz,
                                  const autodiff::Tensor& bandwidth,
                                  std::size_t kernel_length, int sample_rate);

// Per-channel Gaussian-weighted pooling over (c x len): a sum-normalized
// Gaussian window of `width` taps with per-channel sigma = pool_width,
// advanced by `stride`. Output (c x frames), frames = (len-width)/stride+1.
autodiff::Tensor gaussian_pool(autodiff::Tape& tape, const autodiff::Tensor& x,
                               const autodiff::Tensor& pool_width,
                               std::size_t width, std::size_t stride);

// Per-channel energy normalization over (c x t):
//   M_0 = E_0, M_t = (1-s) M_{t-1} + s E_t
//   out_t = (E_t / (eps + M_t)^alpha + delta)^(1/root) - delta^(1/root)
// alpha/delta/root are (c) tensors; gradients flow through the recurrence.
// Requires E >= 0 elementwise.
autodiff::Tensor pcen(autodiff::Tape& tape, const autodiff::Tensor& energy,
                      const autodiff::Tensor& alpha,
                      const autodiff::Tensor& delta,
                      const autodiff::Tensor& root, double s, double eps);

}  // namespace medfront::frontends
