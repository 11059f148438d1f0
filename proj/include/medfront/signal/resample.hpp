#pragma once

#include "medfront/signal/waveform.hpp"

namespace medfront::signal {

// Band-limited rational resampling via windowed-sinc polyphase interpolation
// (Kaiser window, beta = 8.6, 64 taps per phase, cutoff at 0.9 of the smaller
// Nyquist, unit DC gain per phase). Output length = round(len * to / from).
Waveform resample(const Waveform& w, int to_hz);

}  // namespace medfront::signal
