// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/fft.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unisep/error.h"

namespace unisep {

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

bool IsPowerOfTwo(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void Fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  UNISEP_CHECK(IsPowerOfTwo(n), ErrorCode::kInvalidArgument,
               "FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly rather than by recurrence to keep the
    // rounding error flat across large sizes.
    std::vector<std::complex<double>> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi * k / len;
      tw[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> RealFft(std::span<const double> input,
                                          std::size_t fft_len) {
  std::vector<std::complex<double>> buf(fft_len);
  const std::size_t m = std::min(fft_len, input.size());
  for (std::size_t i = 0; i < m; ++i) buf[i] = input[i];
  Fft(buf, false);
  buf.resize(fft_len / 2 + 1);
  return buf;
}

std::vector<double> InverseRealFft(std::span<const std::complex<double>> half,
                                   std::size_t fft_len) {
  UNISEP_CHECK(half.size() == fft_len / 2 + 1, ErrorCode::kShapeMismatch,
               "half spectrum must have fft_len/2+1 bins");
  std::vector<std::complex<double>> buf(fft_len);
  buf[0] = half[0].real();
  for (std::size_t k = 1; k < fft_len / 2; ++k) {
    buf[k] = half[k];
    buf[fft_len - k] = std::conj(half[k]);
  }
  if (fft_len >= 2) buf[fft_len / 2] = half[fft_len / 2].real();
  Fft(buf, true);
  std::vector<double> out(fft_len);
  const double scale = 1.0 / static_cast<double>(fft_len);
  for (std::size_t i = 0; i < fft_len; ++i) out[i] = buf[i].real() * scale;
  return out;
}

std::vector<double> RealFftAdjoint(std::span<const std::complex<double>> half,
                                   std::size_t fft_len) {
  UNISEP_CHECK(half.size() == fft_len / 2 + 1, ErrorCode::kShapeMismatch,
               "half spectrum must have fft_len/2+1 bins");
  std::vector<std::complex<double>> buf(fft_len);
  std::copy(half.begin(), half.end(), buf.begin());
  Fft(buf, true);
  std::vector<double> out(fft_len);
  for (std::size_t i = 0; i < fft_len; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace unisep
