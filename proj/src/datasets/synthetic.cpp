#include "medfront/datasets/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "medfront/autodiff/rng.hpp"
#include "medfront/datasets/wav.hpp"
#include "medfront/errors.hpp"
#include "medfront/signal/biquad.hpp"

namespace medfront::datasets {

namespace {

constexpr double kPi = 3.14159265358979323846;

using autodiff::Rng;

void validate(const SyntheticSpec& spec) {
  if (spec.count < 2) {
    throw std::invalid_argument(
        "generate_synthetic_corpus: count must be >= 2 to cover both classes");
  }
  if (spec.sample_rate <= 0 || spec.duration_s <= 0.0) {
    throw std::invalid_argument(
        "generate_synthetic_corpus: sample_rate and duration_s must be "
        "positive");
  }
  if (!(0.0 < spec.fmin_hz && spec.fmin_hz < spec.fmax_hz &&
        spec.fmax_hz < spec.sample_rate / 2.0)) {
    throw std::invalid_argument(
        "generate_synthetic_corpus: need 0 < fmin_hz < fmax_hz < Nyquist");
  }
}

// Adds a Hann-enveloped burst of `payload` (evaluated at absolute sample
// index) into out[start, start+len).
template <typename Payload>
void add_burst(std::vector<double>& out, std::size_t start, std::size_t len,
               double amplitude, Payload payload) {
  for (std::size_t k = 0; k < len; ++k) {
    const double env =
        len > 1 ? 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) /
                                       static_cast<double>(len - 1))
                : 1.0;
    out[start + k] += amplitude * env * payload(start + k);
  }
}

}  // namespace

std::vector<std::pair<std::string, Label>> generate_synthetic_corpus(
    const std::filesystem::path& dir, const SyntheticSpec& spec) {
  validate(spec);
  std::filesystem::create_directories(dir);

  const auto n_samples = static_cast<std::size_t>(
      std::llround(spec.duration_s * spec.sample_rate));
  const auto noise_filter = signal::design_butterworth_bandpass(
      4, spec.fmin_hz, spec.fmax_hz, spec.sample_rate);
  // Tones sit comfortably inside the band so later bandpass preprocessing
  // cannot erase the class signal.
  const double margin = 0.1 * (spec.fmax_hz - spec.fmin_hz);

  std::vector<std::pair<std::string, Label>> listing;
  listing.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    // One finalizer step decorrelates per-file streams; Rng(seed + i) alone
    // would make neighboring files shifted copies of the same sequence.
    Rng rng(Rng(spec.seed + i).next_u64());
    const Label label = (i % 2 == 0) ? Label::kAbnormal : Label::kNormal;

    std::vector<double> samples(n_samples, 0.0);
    for (auto& s : samples) s = 0.005 * rng.normal();  // background floor

    std::vector<double> noise;
    double tone_hz = 0.0;
    if (label == Label::kAbnormal) {
      tone_hz = rng.uniform(spec.fmin_hz + margin, spec.fmax_hz - margin);
    } else {
      signal::Waveform white;
      white.sample_rate = spec.sample_rate;
      white.samples.resize(n_samples);
      for (auto& s : white.samples) s = rng.normal();
      noise = signal::apply_filter(noise_filter, white).samples;
      const double peak = std::max(
          1e-12, std::abs(*std::max_element(
                     noise.begin(), noise.end(),
                     [](double a, double b) { return std::abs(a) < std::abs(b); })));
      for (auto& s : noise) s /= peak;
    }

    const std::size_t n_bursts = 2 + static_cast<std::size_t>(rng.below(3));
    for (std::size_t b = 0; b < n_bursts; ++b) {
      const double max_burst_s = 0.35 * spec.duration_s;
      const double burst_s = rng.uniform(0.4 * max_burst_s, max_burst_s);
      const double start_s = rng.uniform(0.0, spec.duration_s - burst_s);
      const auto start = static_cast<std::size_t>(
          std::llround(start_s * spec.sample_rate));
      const auto len = std::min(
          n_samples - start,
          static_cast<std::size_t>(std::llround(burst_s * spec.sample_rate)));
      const double amp = rng.uniform(0.4, 0.8);
      if (label == Label::kAbnormal) {
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double w = 2.0 * kPi * tone_hz / spec.sample_rate;
        add_burst(samples, start, len, amp, [&](std::size_t t) {
          return std::sin(w * static_cast<double>(t) + phase);
        });
      } else {
        add_burst(samples, start, len, amp,
                  [&](std::size_t t) { return noise[t]; });
      }
    }

    for (auto& s : samples) s = std::clamp(s, -0.95, 0.95);

    char name[32];
    std::snprintf(name, sizeof(name), "synth_%05zu.wav", i);
    signal::Waveform w;
    w.samples = std::move(samples);
    w.sample_rate = spec.sample_rate;
    w.source_id = name;
    write_wav((dir / name).string(), w, WavFormat::kPcm16);
    listing.emplace_back(name, label);
  }

  std::ofstream csv(dir / "labels.csv", std::ios::binary);
  if (!csv) {
    throw DataError("generate_synthetic_corpus: cannot open " +
                    (dir / "labels.csv").string());
  }
  csv << "file,label\n";
  for (const auto& [file, label] : listing) {
    csv << file << ',' << label_name(label) << '\n';
  }
  return listing;
}

}  // namespace medfront::datasets
