#include "medfront/signal/biquad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "medfront/errors.hpp"

namespace medfront::signal {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> bilinear(std::complex<double> s, double fs) {
  const double k = 2.0 * fs;
  return (k + s) / (k - s);
}

// Gain of one section at angular frequency w (rad/sample).
double section_gain(const BiquadSection& s, double w) {
  const std::complex<double> z1 = std::exp(std::complex<double>(0.0, -w));
  const std::complex<double> z2 = z1 * z1;
  const std::complex<double> num = s.b0 + s.b1 * z1 + s.b2 * z2;
  const std::complex<double> den = 1.0 + s.a1 * z1 + s.a2 * z2;
  return std::abs(num / den);
}

}  // namespace

BiquadCascade design_butterworth_bandpass(int order, double low_hz,
                                          double high_hz, int sample_rate) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument(
        "design_butterworth_bandpass: order must be even and >= 2, got " +
        std::to_string(order));
  }
  if (sample_rate <= 0) {
    throw std::invalid_argument(
        "design_butterworth_bandpass: sample_rate must be > 0");
  }
  const double nyquist = 0.5 * sample_rate;
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < nyquist)) {
    throw std::invalid_argument(
        "design_butterworth_bandpass: need 0 < low < high < Nyquist, got [" +
        std::to_string(low_hz) + ", " + std::to_string(high_hz) + "] at " +
        std::to_string(sample_rate) + " Hz");
  }

  const int proto_order = order / 2;
  const double fs = sample_rate;
  // pre-warped band edges
  const double wl = 2.0 * fs * std::tan(kPi * low_hz / fs);
  const double wh = 2.0 * fs * std::tan(kPi * high_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;
  // digital frequency of the warped center, used for gain normalization
  const double f0 = fs / kPi * std::atan(w0 / (2.0 * fs));
  const double omega0 = 2.0 * kPi * f0 / fs;

  BiquadCascade cascade;
  cascade.design_meta = {order, low_hz, high_hz, sample_rate};

  // Prototype poles in the upper-left quadrant; conjugates are implicit.
  // Each yields two bandpass poles, hence one section per pole here.
  for (int k = 0; k < proto_order; ++k) {
    const double theta = kPi * (2.0 * k + proto_order + 1.0) / (2.0 * proto_order);
    const std::complex<double> p(std::cos(theta), std::sin(theta));
    if (p.imag() <= 0.0) continue;
    const std::complex<double> pb = p * bw;
    const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    for (const std::complex<double> s : {(pb + disc) * 0.5, (pb - disc) * 0.5}) {
      const std::complex<double> z = bilinear(s, fs);
      BiquadSection sec;
      sec.a1 = -2.0 * z.real();
      sec.a2 = std::norm(z);
      sec.b0 = 1.0;
      sec.b1 = 0.0;
      sec.b2 = -1.0;  // zeros at z = +1 and z = -1
      const double g = section_gain(sec, omega0);
      sec.b0 /= g;
      sec.b2 /= g;
      cascade.sections.push_back(sec);
    }
  }
  if (proto_order % 2 == 1) {
    // odd prototype order has one real pole at s = -1
    const std::complex<double> pb(-bw, 0.0);
    const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    const std::complex<double> z = bilinear((pb + disc) * 0.5, fs);
    // the pair (pb +/- disc)/2 maps to z and (for complex disc) conj(z);
    // for real disc both roots are real and must share the section
    BiquadSection sec;
    if (std::abs(disc.imag()) > 0.0 || std::abs(z.imag()) > 1e-14) {
      sec.a1 = -2.0 * z.real();
      sec.a2 = std::norm(z);
    } else {
      const std::complex<double> z2 = bilinear((pb - disc) * 0.5, fs);
      sec.a1 = -(z.real() + z2.real());
      sec.a2 = z.real() * z2.real();
    }
    sec.b0 = 1.0;
    sec.b1 = 0.0;
    sec.b2 = -1.0;
    const double g = section_gain(sec, omega0);
    sec.b0 /= g;
    sec.b2 /= g;
    cascade.sections.push_back(sec);
  }

  // low-Q sections first
  std::sort(cascade.sections.begin(), cascade.sections.end(),
            [](const BiquadSection& a, const BiquadSection& b) {
              return a.a2 < b.a2;
            });
  return cascade;
}

std::complex<double> cascade_response(const BiquadCascade& c, double freq_hz) {
  const double w = 2.0 * kPi * freq_hz / c.design_meta.sample_rate;
  const std::complex<double> z1 = std::exp(std::complex<double>(0.0, -w));
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : c.sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

std::vector<double> pole_magnitudes(const BiquadCascade& c) {
  std::vector<double> mags;
  mags.reserve(2 * c.sections.size());
  for (const auto& s : c.sections) {
    const double disc = s.a1 * s.a1 - 4.0 * s.a2;
    if (disc < 0.0) {
      const double m = std::sqrt(s.a2);  // |z|^2 = a2 for a conjugate pair
      mags.push_back(m);
      mags.push_back(m);
    } else {
      const double r = std::sqrt(disc);
      mags.push_back(std::abs((-s.a1 + r) * 0.5));
      mags.push_back(std::abs((-s.a1 - r) * 0.5));
    }
  }
  return mags;
}

Waveform apply_filter(const BiquadCascade& c, const Waveform& w) {
  if (c.design_meta.sample_rate != w.sample_rate) {
    throw std::invalid_argument(
        "apply_filter: cascade designed at " +
        std::to_string(c.design_meta.sample_rate) + " Hz, waveform is " +
        std::to_string(w.sample_rate) + " Hz");
  }
  Waveform out = w;
  for (const auto& s : c.sections) {
    double s1 = 0.0, s2 = 0.0;
    for (auto& x : out.samples) {
      const double y = s.b0 * x + s1;
      s1 = s.b1 * x - s.a1 * y + s2;
      s2 = s.b2 * x - s.a2 * y;
      x = y;
    }
  }
  check_finite(out, "apply_filter");
  return out;
}

}  // namespace medfront::signal
