// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/signal.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "unisep/error.h"
#include "unisep/fft.h"

namespace unisep {

void ValidateWaveform(const Waveform& w) {
  UNISEP_CHECK(w.sample_rate_hz > 0, ErrorCode::kInvalidArgument,
               "sample rate must be positive");
  for (double s : w.samples) {
    UNISEP_CHECK(std::isfinite(s), ErrorCode::kNonFinite,
                 "waveform contains NaN or Inf");
  }
}

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::Derive(std::uint64_t seed, std::uint64_t index) {
  return Rng(SplitMix64(SplitMix64(seed) ^ SplitMix64(index + 0x5851f42dULL)));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::Normal() {
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

const char* SynthKindName(SynthKind kind) {
  switch (kind) {
    case SynthKind::kTone: return "tone";
    case SynthKind::kChirp: return "chirp";
    case SynthKind::kBandNoise: return "band-noise";
    case SynthKind::kImpulseTrain: return "impulse-train";
    case SynthKind::kSilenceThenBurst: return "silence-then-burst";
  }
  return "?";
}

SynthKind ParseSynthKind(const std::string& name) {
  for (SynthKind k : {SynthKind::kTone, SynthKind::kChirp, SynthKind::kBandNoise,
                      SynthKind::kImpulseTrain, SynthKind::kSilenceThenBurst}) {
    if (name == SynthKindName(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown synth kind '" + name + "'");
}

void ValidateSynthSpec(const SynthSpec& spec, double duration_s,
                       int sample_rate_hz) {
  UNISEP_CHECK(sample_rate_hz > 0, ErrorCode::kInvalidArgument,
               "sample rate must be positive");
  UNISEP_CHECK(duration_s > 0.0 && std::isfinite(duration_s),
               ErrorCode::kInvalidArgument, "duration must be positive");
  UNISEP_CHECK(spec.amplitude >= 0.0 && spec.amplitude <= 1.0,
               ErrorCode::kInvalidArgument, "amplitude must be in [0, 1]");
  const double nyquist = sample_rate_hz / 2.0;
  auto check_freq = [&](double f, const char* what) {
    UNISEP_CHECK(f > 0.0 && f < nyquist, ErrorCode::kInvalidArgument,
                 std::string(what) + " must lie in (0, sample_rate/2)");
  };
  check_freq(spec.freq_hz, "freq_hz");
  if (spec.kind == SynthKind::kChirp || spec.kind == SynthKind::kBandNoise) {
    check_freq(spec.freq2_hz, "freq2_hz");
  }
  if (spec.kind == SynthKind::kBandNoise) {
    UNISEP_CHECK(spec.freq2_hz > spec.freq_hz, ErrorCode::kInvalidArgument,
                 "band-noise needs freq2_hz > freq_hz");
  }
  if (spec.kind == SynthKind::kSilenceThenBurst) {
    UNISEP_CHECK(spec.onset_s >= 0.0 && spec.burst_s > 0.0,
                 ErrorCode::kInvalidArgument,
                 "silence-then-burst needs onset_s >= 0 and burst_s > 0");
  }
}

namespace {

// Random-phase flat spectrum over [lo, hi] Hz, synthesized on a
// power-of-two grid and truncated to n samples.
std::vector<double> BandNoise(std::size_t n, double lo, double hi, int rate,
                              Rng& rng) {
  const std::size_t fft_len = NextPowerOfTwo(std::max<std::size_t>(n, 2));
  std::vector<std::complex<double>> spec(fft_len / 2 + 1);
  for (std::size_t k = 1; k < fft_len / 2; ++k) {
    const double f = static_cast<double>(k) * rate / fft_len;
    if (f < lo || f > hi) continue;
    const double phase = 2.0 * std::numbers::pi * rng.Uniform();
    spec[k] = std::polar(1.0, phase);
  }
  std::vector<double> full = InverseRealFft(spec, fft_len);
  full.resize(n);
  return full;
}

}  // namespace

Waveform SynthSource(const SynthSpec& spec, double duration_s,
                     int sample_rate_hz) {
  ValidateSynthSpec(spec, duration_s, sample_rate_hz);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  UNISEP_CHECK(n > 0, ErrorCode::kInvalidArgument, "duration too short");
  const double rate = sample_rate_hz;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> x(n, 0.0);
  Rng rng(spec.seed);

  switch (spec.kind) {
    case SynthKind::kTone:
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = spec.amplitude * std::sin(two_pi * spec.freq_hz * i / rate);
      }
      break;
    case SynthKind::kChirp: {
      const double sweep = (spec.freq2_hz - spec.freq_hz) / duration_s;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / rate;
        x[i] = spec.amplitude *
               std::sin(two_pi * (spec.freq_hz * t + 0.5 * sweep * t * t));
      }
      break;
    }
    case SynthKind::kBandNoise: {
      x = BandNoise(n, spec.freq_hz, spec.freq2_hz, sample_rate_hz, rng);
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      if (peak > 0.0) {
        for (double& v : x) v *= spec.amplitude / peak;
      }
      break;
    }
    case SynthKind::kImpulseTrain: {
      const double period = rate / spec.freq_hz;
      // Random start phase within one period.
      double next = rng.Uniform() * period;
      while (next < static_cast<double>(n)) {
        x[static_cast<std::size_t>(next)] = spec.amplitude;
        next += period;
      }
      break;
    }
    case SynthKind::kSilenceThenBurst: {
      const auto begin = static_cast<std::size_t>(std::llround(spec.onset_s * rate));
      const auto end = std::min<std::size_t>(
          n, static_cast<std::size_t>(std::llround((spec.onset_s + spec.burst_s) * rate)));
      for (std::size_t i = begin; i < end; ++i) {
        x[i] = spec.amplitude * std::sin(two_pi * spec.freq_hz * (i - begin) / rate);
      }
      break;
    }
  }
  return Waveform(std::move(x), sample_rate_hz);
}

}  // namespace unisep
