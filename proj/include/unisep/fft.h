// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_FFT_H_
#define UNISEP_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace unisep {

std::size_t NextPowerOfTwo(std::size_t n);
bool IsPowerOfTwo(std::size_t n);

// In-place iterative radix-2 transform; size must be a power of two.
// The inverse is unnormalized (no 1/N).
void Fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Real input zero-padded (or truncated) to fft_len; returns fft_len/2+1 bins.
std::vector<std::complex<double>> RealFft(std::span<const double> input,
                                          std::size_t fft_len);

// Inverse of RealFft for a Hermitian half spectrum, normalized by 1/fft_len.
// The imaginary parts of the DC and Nyquist bins are ignored.
std::vector<double> InverseRealFft(std::span<const std::complex<double>> half,
                                   std::size_t fft_len);

// Adjoint of RealFft under the real inner product Re<a, b> on half spectra:
// out[n] = Re(sum_k half[k] * exp(+2*pi*i*k*n/fft_len)), n < fft_len.
std::vector<double> RealFftAdjoint(std::span<const std::complex<double>> half,
                                   std::size_t fft_len);

}  // namespace unisep

#endif  // UNISEP_FFT_H_
