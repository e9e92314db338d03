#pragma once

#include <complex>
#include <vector>

namespace lsilab::detail {

// In-place iterative radix-2 transform; a.size() must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Linear convolution via one packed complex FFT. Output length is
// a.size() + b.size() - 1.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

// Schoolbook linear convolution, used for short operands.
std::vector<double> direct_convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lsilab::detail
