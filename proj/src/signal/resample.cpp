#include "medfront/signal/resample.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace medfront::signal {

namespace {

constexpr int kTapsPerPhase = 64;
constexpr double kKaiserBeta = 8.6;

// Modified Bessel function of the first kind, order zero (series expansion).
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_x = 0.5 * x;
  for (int k = 1; k < 64; ++k) {
    const double f = half_x / k;
    term *= f * f;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

Waveform resample(const Waveform& w, int to_hz) {
  if (to_hz <= 0) {
    throw std::invalid_argument("resample: to_hz must be > 0");
  }
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("resample: sample_rate must be > 0");
  }
  if (to_hz == w.sample_rate) return w;

  const int from_hz = w.sample_rate;
  const int g = std::gcd(from_hz, to_hz);
  const std::int64_t up = to_hz / g;    // L
  const std::int64_t down = from_hz / g;  // M

  // Prototype lowpass at the upsampled rate from_hz * L, odd length so the
  // group delay D is an integer number of upsampled ticks.
  const std::int64_t taps = kTapsPerPhase * up + 1;
  const std::int64_t delay = (taps - 1) / 2;
  const double cutoff_hz = 0.45 * std::min(from_hz, to_hz);  // 0.9 * Nyquist
  const double fs_up = static_cast<double>(from_hz) * static_cast<double>(up);
  const double norm_cut = 2.0 * cutoff_hz / fs_up;
  const double i0_beta = bessel_i0(kKaiserBeta);

  std::vector<double> h(taps);
  for (std::int64_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i - delay);
    double sinc = norm_cut;
    if (i != delay) {
      const double arg = std::numbers::pi * norm_cut * t;
      sinc = norm_cut * std::sin(arg) / arg;
    }
    const double u = 2.0 * t / static_cast<double>(taps - 1);
    const double win = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
    h[i] = sinc * win;
  }
  // Unit DC gain per polyphase branch keeps low-frequency content exact.
  for (std::int64_t p = 0; p < up; ++p) {
    double s = 0.0;
    for (std::int64_t i = p; i < taps; i += up) s += h[i];
    if (s != 0.0) {
      for (std::int64_t i = p; i < taps; i += up) h[i] /= s;
    }
  }

  const auto in_len = static_cast<std::int64_t>(w.samples.size());
  const auto out_len = static_cast<std::int64_t>(
      std::llround(static_cast<double>(in_len) * to_hz / from_hz));

  Waveform out;
  out.sample_rate = to_hz;
  out.source_id = w.source_id;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t q = n * down + delay;
    const std::int64_t m_lo =
        q >= taps - 1 ? (q - (taps - 1) + up - 1) / up : 0;
    std::int64_t m_hi = q / up;
    if (m_hi > in_len - 1) m_hi = in_len - 1;
    double acc = 0.0;
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
      acc += w.samples[static_cast<std::size_t>(m)] *
             h[static_cast<std::size_t>(q - m * up)];
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  check_finite(out, "resample");
  return out;
}

}  // namespace medfront::signal
