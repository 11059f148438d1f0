#include "medfront/signal/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace medfront::signal {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft: size must be a power of two, got " +
                                std::to_string(n));
  }
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& c : data) c *= inv_n;
  }
}

namespace {

std::vector<std::complex<double>> padded(
    const std::vector<std::complex<double>>& x, std::size_t n,
    const char* who) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument(std::string(who) +
                                ": n must be a power of two, got " +
                                std::to_string(n));
  }
  if (x.size() > n) {
    throw std::invalid_argument(std::string(who) + ": input length " +
                                std::to_string(x.size()) + " exceeds n = " +
                                std::to_string(n));
  }
  std::vector<std::complex<double>> data(n, {0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) data[i] = x[i];
  return data;
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      std::size_t n) {
  auto data = padded(x, n, "fft");
  fft_inplace(data, false);
  return data;
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x,
                                       std::size_t n) {
  auto data = padded(x, n, "ifft");
  fft_inplace(data, true);
  return data;
}

}  // namespace medfront::signal
