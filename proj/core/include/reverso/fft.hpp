#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace reverso {

using cdouble = std::complex<double>;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// In-place iterative radix-2 complex FFT. n must be a power of two.
void fft_inplace(std::vector<cdouble>& a, bool inverse);

// Real FFT of `signal` zero-padded to length n (power of two, n >= len).
// Returns bins 0..n/2 inclusive.
std::vector<cdouble> rfft(const std::vector<double>& signal, std::size_t n);

// Inverse of rfft; returns n real samples.
std::vector<double> irfft(const std::vector<cdouble>& spectrum, std::size_t n);

}  // namespace reverso
