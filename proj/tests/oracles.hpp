// Independent reference implementations used only by tests. These are
// deliberately naive (O(n^2) transforms, direct formulas) so they cannot
// share bugs with the optimized library code they check.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

namespace oracles {

constexpr double kPi = 3.14159265358979323846;

// Direct O(n^2) DFT, forward sign convention exp(-2*pi*i*k*j/n).
inline std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * static_cast<double>(k * j) /
                         static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline double max_abs_diff(const std::vector<std::complex<double>>& a,
                           const std::vector<std::complex<double>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

inline double max_abs(const std::vector<std::complex<double>>& a) {
  double worst = 0.0;
  for (const auto& v : a) worst = std::max(worst, std::abs(v));
  return worst;
}

inline std::vector<double> make_sine(double freq_hz, int sample_rate,
                                     std::size_t n, double amp = 1.0,
                                     double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) /
                              sample_rate +
                          phase);
  }
  return x;
}

inline std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

// Signal-to-noise ratio in dB of `actual` against `expected`, skipping
// `skip` samples at both edges (filter transients / transition regions).
inline double snr_db(const std::vector<double>& expected,
                     const std::vector<double>& actual, std::size_t skip) {
  double sig = 0.0;
  double err = 0.0;
  const std::size_t n = std::min(expected.size(), actual.size());
  for (std::size_t i = skip; i + skip < n; ++i) {
    sig += expected[i] * expected[i];
    const double d = actual[i] - expected[i];
    err += d * d;
  }
  if (err == 0.0) return 1e9;
  return 10.0 * std::log10(sig / err);
}

// Amplitude of the best-fit sinusoid at freq_hz (least squares on
// sin/cos quadrature), measured away from the edges.
inline double tone_amplitude(const std::vector<double>& x, double freq_hz,
                             int sample_rate, std::size_t skip) {
  double cs = 0.0;
  double sn = 0.0;
  std::size_t count = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) {
    const double ang =
        2.0 * kPi * freq_hz * static_cast<double>(i) / sample_rate;
    cs += x[i] * std::cos(ang);
    sn += x[i] * std::sin(ang);
    ++count;
  }
  if (count == 0) return 0.0;
  return 2.0 * std::sqrt(cs * cs + sn * sn) / static_cast<double>(count);
}

}  // namespace oracles
