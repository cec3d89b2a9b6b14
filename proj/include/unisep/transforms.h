// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Framewise analysis/synthesis transforms: the square-root Hann STFT pair
// and a learnable real basis pair (strided 1-D convolution with ReLU, and
// its transposed convolution).
//
// Framing: the signal is pre-padded with (window_len - hop) zeros and
// post-padded until the last frame is complete, so that with
// hop = window_len / 2 every input sample is covered by two frames and the
// sqrt-Hann pair reconstructs every sample, not just the interior.

#ifndef UNISEP_TRANSFORMS_H_
#define UNISEP_TRANSFORMS_H_

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "unisep/signal.h"

namespace unisep {

struct FrameSpec {
  std::size_t window_len = 0;
  std::size_t hop = 0;
  std::size_t fft_len = 0;
  int sample_rate_hz = kDefaultSampleRate;

  // window_len = round(ms * rate / 1000), hop = window_len / 2,
  // fft_len = smallest power of two >= window_len.
  static FrameSpec FromWindowMs(double window_ms, int sample_rate_hz = kDefaultSampleRate);
  static FrameSpec FromWindowLength(std::size_t window_len,
                                    int sample_rate_hz = kDefaultSampleRate);

  std::size_t PrePad() const { return window_len - hop; }
  std::size_t NumBins() const { return fft_len / 2 + 1; }
  // Frames needed to cover `length` samples under the padding policy.
  std::size_t FrameCount(std::size_t length) const;
  std::size_t PaddedLength(std::size_t frames) const {
    return (frames - 1) * hop + window_len;
  }
  double window_ms() const { return 1000.0 * window_len / sample_rate_hz; }

  bool operator==(const FrameSpec&) const = default;
};

// Throws kInvalidArgument unless window_len is even and >= 2, hop divides
// window_len, and fft_len is a power of two >= window_len.
void ValidateFrameSpec(const FrameSpec& spec);

enum class CoeffKind : std::uint32_t { kComplexStft = 0, kRealLearned = 1 };

// frames x bins, row-major. Learned coefficients keep a zero imaginary part.
struct CoeffFrames {
  std::vector<std::complex<double>> data;
  CoeffKind kind = CoeffKind::kComplexStft;
  FrameSpec spec;
  std::size_t frames = 0;
  std::size_t n_bins = 0;
  std::size_t original_len = 0;

  std::complex<double>& at(std::size_t t, std::size_t k) { return data[t * n_bins + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const {
    return data[t * n_bins + k];
  }
};

struct LearnedBasis {
  std::size_t n_basis = 0;
  std::vector<double> analysis;   // n_basis x window_len
  std::vector<double> synthesis;  // n_basis x window_len
  FrameSpec spec;
};

// Entries uniform in [-1/sqrt(window_len), 1/sqrt(window_len)]; rows are
// redrawn in the (measure-zero) event that one is identically zero.
LearnedBasis InitLearnedBasis(std::size_t n_basis, const FrameSpec& spec,
                              std::uint64_t seed);

// Periodic Hann, square-rooted. Requires even window_len >= 2.
std::vector<double> SqrtHannWindow(std::size_t window_len);

// Zero-pads `x` according to the framing policy for `frames` frames.
std::vector<double> PadForFraming(const std::vector<double>& x,
                                  const FrameSpec& spec, std::size_t frames);

CoeffFrames Stft(const Waveform& waveform, const FrameSpec& spec);
Waveform Istft(const CoeffFrames& coeffs, std::size_t target_len);

// Adjoint of the (linear) Stft map with respect to the real inner products
// sum x*y on waveforms and sum Re(conj(a)*b) on coefficients.
std::vector<double> StftAdjoint(const CoeffFrames& coeffs, std::size_t target_len);

CoeffFrames LearnedAnalysis(const Waveform& waveform, const LearnedBasis& basis);
Waveform LearnedSynthesis(const CoeffFrames& coeffs, const LearnedBasis& basis,
                          std::size_t target_len);

// Debug container: "USEPCOEF", u32 version, header, row-major float64
// payload (re/im interleaved for complex_stft, real only for real_learned).
void SaveCoeffFrames(const CoeffFrames& coeffs, const std::string& path);
CoeffFrames LoadCoeffFrames(const std::string& path);

}  // namespace unisep

#endif  // UNISEP_TRANSFORMS_H_
