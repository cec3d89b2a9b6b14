// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/transforms.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "unisep/error.h"
#include "unisep/fft.h"

namespace unisep {

FrameSpec FrameSpec::FromWindowMs(double window_ms, int sample_rate_hz) {
  UNISEP_CHECK(window_ms > 0.0, ErrorCode::kInvalidArgument,
               "window_ms must be positive");
  const auto len = static_cast<std::size_t>(std::llround(window_ms * sample_rate_hz / 1000.0));
  return FromWindowLength(len, sample_rate_hz);
}

FrameSpec FrameSpec::FromWindowLength(std::size_t window_len, int sample_rate_hz) {
  FrameSpec spec;
  spec.window_len = window_len;
  spec.hop = window_len / 2;
  spec.fft_len = NextPowerOfTwo(window_len);
  spec.sample_rate_hz = sample_rate_hz;
  ValidateFrameSpec(spec);
  return spec;
}

std::size_t FrameSpec::FrameCount(std::size_t length) const {
  const std::size_t covered = length + window_len - hop;
  return (covered + hop - 1) / hop;
}

void ValidateFrameSpec(const FrameSpec& spec) {
  UNISEP_CHECK(spec.window_len >= 2 && spec.window_len % 2 == 0,
               ErrorCode::kInvalidArgument, "window_len must be even and >= 2");
  UNISEP_CHECK(spec.hop >= 1 && spec.window_len % spec.hop == 0,
               ErrorCode::kInvalidArgument, "hop must divide window_len");
  UNISEP_CHECK(IsPowerOfTwo(spec.fft_len) && spec.fft_len >= spec.window_len,
               ErrorCode::kInvalidArgument,
               "fft_len must be a power of two >= window_len");
  UNISEP_CHECK(spec.sample_rate_hz > 0, ErrorCode::kInvalidArgument,
               "sample rate must be positive");
}

std::vector<double> SqrtHannWindow(std::size_t window_len) {
  UNISEP_CHECK(window_len >= 2 && window_len % 2 == 0, ErrorCode::kInvalidArgument,
               "sqrt-Hann window length must be even and >= 2");
  std::vector<double> w(window_len);
  for (std::size_t n = 0; n < window_len; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(window_len));
    w[n] = std::sqrt(std::max(hann, 0.0));
  }
  return w;
}

LearnedBasis InitLearnedBasis(std::size_t n_basis, const FrameSpec& spec,
                              std::uint64_t seed) {
  ValidateFrameSpec(spec);
  UNISEP_CHECK(n_basis >= 1, ErrorCode::kInvalidArgument, "n_basis must be >= 1");
  LearnedBasis basis;
  basis.n_basis = n_basis;
  basis.spec = spec;
  const std::size_t w = spec.window_len;
  const double bound = 1.0 / std::sqrt(static_cast<double>(w));
  Rng rng(seed);
  auto fill = [&](std::vector<double>& m) {
    m.assign(n_basis * w, 0.0);
    for (std::size_t r = 0; r < n_basis; ++r) {
      bool nonzero = false;
      while (!nonzero) {
        for (std::size_t i = 0; i < w; ++i) {
          m[r * w + i] = rng.Uniform(-bound, bound);
          nonzero = nonzero || m[r * w + i] != 0.0;
        }
      }
    }
  };
  fill(basis.analysis);
  fill(basis.synthesis);
  return basis;
}

std::vector<double> PadForFraming(const std::vector<double>& x,
                                  const FrameSpec& spec, std::size_t frames) {
  std::vector<double> padded(spec.PaddedLength(frames), 0.0);
  const std::size_t pre = spec.PrePad();
  const std::size_t n = std::min(x.size(), padded.size() - pre);
  std::copy_n(x.begin(), n, padded.begin() + static_cast<std::ptrdiff_t>(pre));
  return padded;
}

namespace {

void CheckWaveformForSpec(const Waveform& waveform, const FrameSpec& spec) {
  ValidateFrameSpec(spec);
  UNISEP_CHECK(!waveform.empty(), ErrorCode::kInvalidArgument, "empty waveform");
  UNISEP_CHECK(waveform.sample_rate_hz == spec.sample_rate_hz,
               ErrorCode::kInvalidArgument,
               "waveform sample rate does not match the frame spec");
}

void CheckTargetLength(const CoeffFrames& coeffs, std::size_t target_len) {
  UNISEP_CHECK(target_len > 0 && coeffs.spec.FrameCount(target_len) == coeffs.frames,
               ErrorCode::kInvalidArgument,
               "target length " + std::to_string(target_len) +
                   " is inconsistent with " + std::to_string(coeffs.frames) + " frames");
  UNISEP_CHECK(coeffs.data.size() == coeffs.frames * coeffs.n_bins,
               ErrorCode::kShapeMismatch, "coefficient buffer size mismatch");
}

}  // namespace

CoeffFrames Stft(const Waveform& waveform, const FrameSpec& spec) {
  CheckWaveformForSpec(waveform, spec);
  CoeffFrames out;
  out.kind = CoeffKind::kComplexStft;
  out.spec = spec;
  out.original_len = waveform.size();
  out.frames = spec.FrameCount(waveform.size());
  out.n_bins = spec.NumBins();
  out.data.resize(out.frames * out.n_bins);

  const std::vector<double> window = SqrtHannWindow(spec.window_len);
  const std::vector<double> padded = PadForFraming(waveform.samples, spec, out.frames);
  std::vector<double> frame(spec.window_len);
  for (std::size_t t = 0; t < out.frames; ++t) {
    const double* src = padded.data() + t * spec.hop;
    for (std::size_t i = 0; i < spec.window_len; ++i) frame[i] = window[i] * src[i];
    const auto bins = RealFft(frame, spec.fft_len);
    std::copy(bins.begin(), bins.end(), out.data.begin() + static_cast<std::ptrdiff_t>(t * out.n_bins));
  }
  return out;
}

Waveform Istft(const CoeffFrames& coeffs, std::size_t target_len) {
  UNISEP_CHECK(coeffs.kind == CoeffKind::kComplexStft, ErrorCode::kInvalidArgument,
               "istft needs complex_stft coefficients");
  const FrameSpec& spec = coeffs.spec;
  ValidateFrameSpec(spec);
  UNISEP_CHECK(coeffs.n_bins == spec.NumBins(), ErrorCode::kShapeMismatch,
               "bin count does not match fft_len");
  CheckTargetLength(coeffs, target_len);

  const std::vector<double> window = SqrtHannWindow(spec.window_len);
  std::vector<double> acc(spec.PaddedLength(coeffs.frames), 0.0);
  std::vector<double> norm(acc.size(), 0.0);
  for (std::size_t t = 0; t < coeffs.frames; ++t) {
    std::span<const std::complex<double>> half(coeffs.data.data() + t * coeffs.n_bins,
                                               coeffs.n_bins);
    const std::vector<double> frame = InverseRealFft(half, spec.fft_len);
    const std::size_t base = t * spec.hop;
    for (std::size_t i = 0; i < spec.window_len; ++i) {
      acc[base + i] += window[i] * frame[i];
      norm[base + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(target_len);
  const std::size_t pre = spec.PrePad();
  for (std::size_t i = 0; i < target_len; ++i) {
    const double d = norm[pre + i];
    out[i] = d > 1e-10 ? acc[pre + i] / d : 0.0;
  }
  return Waveform(std::move(out), spec.sample_rate_hz);
}

std::vector<double> StftAdjoint(const CoeffFrames& coeffs, std::size_t target_len) {
  UNISEP_CHECK(coeffs.kind == CoeffKind::kComplexStft, ErrorCode::kInvalidArgument,
               "stft adjoint needs complex_stft coefficients");
  const FrameSpec& spec = coeffs.spec;
  CheckTargetLength(coeffs, target_len);
  const std::vector<double> window = SqrtHannWindow(spec.window_len);
  std::vector<double> acc(spec.PaddedLength(coeffs.frames), 0.0);
  for (std::size_t t = 0; t < coeffs.frames; ++t) {
    std::span<const std::complex<double>> half(coeffs.data.data() + t * coeffs.n_bins,
                                               coeffs.n_bins);
    const std::vector<double> frame = RealFftAdjoint(half, spec.fft_len);
    for (std::size_t i = 0; i < spec.window_len; ++i) {
      acc[t * spec.hop + i] += window[i] * frame[i];
    }
  }
  const auto pre = static_cast<std::ptrdiff_t>(spec.PrePad());
  return std::vector<double>(acc.begin() + pre, acc.begin() + pre + static_cast<std::ptrdiff_t>(target_len));
}

CoeffFrames LearnedAnalysis(const Waveform& waveform, const LearnedBasis& basis) {
  CheckWaveformForSpec(waveform, basis.spec);
  const std::size_t w = basis.spec.window_len;
  UNISEP_CHECK(basis.analysis.size() == basis.n_basis * w, ErrorCode::kShapeMismatch,
               "analysis matrix must be n_basis x window_len");
  CoeffFrames out;
  out.kind = CoeffKind::kRealLearned;
  out.spec = basis.spec;
  out.original_len = waveform.size();
  out.frames = basis.spec.FrameCount(waveform.size());
  out.n_bins = basis.n_basis;
  out.data.resize(out.frames * out.n_bins);
  const std::vector<double> padded = PadForFraming(waveform.samples, basis.spec, out.frames);
  for (std::size_t t = 0; t < out.frames; ++t) {
    const double* frame = padded.data() + t * basis.spec.hop;
    for (std::size_t n = 0; n < basis.n_basis; ++n) {
      const double* row = basis.analysis.data() + n * w;
      double acc = 0.0;
      for (std::size_t i = 0; i < w; ++i) acc += row[i] * frame[i];
      out.at(t, n) = std::max(acc, 0.0);
    }
  }
  return out;
}

Waveform LearnedSynthesis(const CoeffFrames& coeffs, const LearnedBasis& basis,
                          std::size_t target_len) {
  UNISEP_CHECK(coeffs.kind == CoeffKind::kRealLearned, ErrorCode::kInvalidArgument,
               "learned synthesis needs real_learned coefficients");
  UNISEP_CHECK(coeffs.n_bins == basis.n_basis, ErrorCode::kShapeMismatch,
               "coefficient bins must equal the basis count");
  UNISEP_CHECK(coeffs.spec == basis.spec, ErrorCode::kShapeMismatch,
               "coefficient frame spec differs from the basis");
  const std::size_t w = basis.spec.window_len;
  UNISEP_CHECK(basis.synthesis.size() == basis.n_basis * w, ErrorCode::kShapeMismatch,
               "synthesis matrix must be n_basis x window_len");
  CheckTargetLength(coeffs, target_len);
  std::vector<double> acc(basis.spec.PaddedLength(coeffs.frames), 0.0);
  for (std::size_t t = 0; t < coeffs.frames; ++t) {
    double* frame = acc.data() + t * basis.spec.hop;
    for (std::size_t n = 0; n < basis.n_basis; ++n) {
      const double c = coeffs.at(t, n).real();
      if (c == 0.0) continue;
      const double* row = basis.synthesis.data() + n * w;
      for (std::size_t i = 0; i < w; ++i) frame[i] += c * row[i];
    }
  }
  const auto pre = static_cast<std::ptrdiff_t>(basis.spec.PrePad());
  return Waveform(std::vector<double>(acc.begin() + pre,
                                      acc.begin() + pre + static_cast<std::ptrdiff_t>(target_len)),
                  basis.spec.sample_rate_hz);
}

namespace {

constexpr char kCoeffMagic[8] = {'U', 'S', 'E', 'P', 'C', 'O', 'E', 'F'};
constexpr std::uint32_t kCoeffVersion = 1;

template <typename T>
void WritePod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  UNISEP_CHECK(is.good(), ErrorCode::kFormatError, "truncated coefficient file");
  return v;
}

}  // namespace

void SaveCoeffFrames(const CoeffFrames& c, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "cannot open " + path);
  os.write(kCoeffMagic, sizeof(kCoeffMagic));
  WritePod<std::uint32_t>(os, kCoeffVersion);
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(c.kind));
  for (std::uint64_t v : {std::uint64_t{c.frames}, std::uint64_t{c.n_bins},
                          std::uint64_t{c.original_len}, std::uint64_t{c.spec.window_len},
                          std::uint64_t{c.spec.hop}, std::uint64_t{c.spec.fft_len},
                          static_cast<std::uint64_t>(c.spec.sample_rate_hz)}) {
    WritePod<std::uint64_t>(os, v);
  }
  for (const auto& z : c.data) {
    WritePod<double>(os, z.real());
    if (c.kind == CoeffKind::kComplexStft) WritePod<double>(os, z.imag());
  }
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "write failed for " + path);
}

CoeffFrames LoadCoeffFrames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  UNISEP_CHECK(is.good(), ErrorCode::kUnreadableFile, "cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  UNISEP_CHECK(is.good() && std::equal(magic, magic + 8, kCoeffMagic),
               ErrorCode::kFormatError, path + " is not a coefficient file");
  UNISEP_CHECK(ReadPod<std::uint32_t>(is) == kCoeffVersion, ErrorCode::kFormatError,
               "unsupported coefficient file version");
  CoeffFrames c;
  const auto kind = ReadPod<std::uint32_t>(is);
  UNISEP_CHECK(kind <= 1, ErrorCode::kFormatError, "bad coefficient kind");
  c.kind = static_cast<CoeffKind>(kind);
  c.frames = ReadPod<std::uint64_t>(is);
  c.n_bins = ReadPod<std::uint64_t>(is);
  c.original_len = ReadPod<std::uint64_t>(is);
  c.spec.window_len = ReadPod<std::uint64_t>(is);
  c.spec.hop = ReadPod<std::uint64_t>(is);
  c.spec.fft_len = ReadPod<std::uint64_t>(is);
  c.spec.sample_rate_hz = static_cast<int>(ReadPod<std::uint64_t>(is));
  c.data.resize(c.frames * c.n_bins);
  for (auto& z : c.data) {
    const double re = ReadPod<double>(is);
    const double im = c.kind == CoeffKind::kComplexStft ? ReadPod<double>(is) : 0.0;
    z = {re, im};
  }
  return c;
}

}  // namespace unisep
