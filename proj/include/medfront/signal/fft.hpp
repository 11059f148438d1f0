#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace medfront::signal {

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// n-point DFT of x, zero-padded to n. n must be a power of two and
// len(x) <= n; otherwise std::invalid_argument.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      std::size_t n);

// Inverse transform; ifft(fft(x), n) == x within 1e-9 relative error.
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x,
                                       std::size_t n);

// In-place radix-2 core. data.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

}  // namespace medfront::signal
