#pragma once

#include <complex>
#include <vector>

#include "medfront/signal/waveform.hpp"

namespace medfront::signal {

// Second-order section, coefficients normalized to a0 = 1.
struct BiquadSection {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

struct BiquadDesignMeta {
  int order = 0;        // total digital order (2 * sections)
  double low_hz = 0;
  double high_hz = 0;
  int sample_rate = 0;
};

struct BiquadCascade {
  std::vector<BiquadSection> sections;
  BiquadDesignMeta design_meta;
};

// Digital Butterworth bandpass: analog prototype of order `order`/2,
// lowpass->bandpass transformation, bilinear transform with frequency
// pre-warping. -3 dB at both cutoffs; unity gain at the warped center.
// order must be even and >= 2; 0 < low_hz < high_hz < sample_rate/2.
BiquadCascade design_butterworth_bandpass(int order, double low_hz,
                                          double high_hz, int sample_rate);

// H(e^{j 2 pi f / fs}) of the cascade.
std::complex<double> cascade_response(const BiquadCascade& c, double freq_hz);

// Pole magnitudes of every section (two per section).
std::vector<double> pole_magnitudes(const BiquadCascade& c);

// Direct-form II transposed cascade, zero initial state, single causal pass.
// Throws std::invalid_argument on a sample-rate mismatch with design_meta.
Waveform apply_filter(const BiquadCascade& c, const Waveform& w);

}  // namespace medfront::signal
