// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_SIGNAL_H_
#define UNISEP_SIGNAL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace unisep {

constexpr int kDefaultSampleRate = 16000;

// Mono time-domain signal. Samples are float64 end to end; file encodings
// are converted at the I/O boundary.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kDefaultSampleRate;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate)
      : samples(std::move(s)), sample_rate_hz(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Throws kNonFinite or kInvalidArgument when the invariants do not hold.
void ValidateWaveform(const Waveform& w);

// Deterministic random stream. Draws are computed from raw 64-bit words so
// sequences do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent child stream keyed by (seed, index).
  static Rng Derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = UniformInt(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

enum class SynthKind { kTone, kChirp, kBandNoise, kImpulseTrain, kSilenceThenBurst };

const char* SynthKindName(SynthKind kind);
SynthKind ParseSynthKind(const std::string& name);

// Parameters for the synthetic stand-in corpus. Field use by kind:
//   tone:               freq_hz
//   chirp:              freq_hz -> freq2_hz, linear sweep over the duration
//   band-noise:         band [freq_hz, freq2_hz]
//   impulse-train:      freq_hz is the repetition rate
//   silence-then-burst: tone at freq_hz starting at onset_s, lasting burst_s
struct SynthSpec {
  SynthKind kind = SynthKind::kTone;
  double freq_hz = 440.0;
  double freq2_hz = 0.0;
  double amplitude = 0.5;
  double onset_s = 0.0;
  double burst_s = 0.0;
  std::uint64_t seed = 0;
};

void ValidateSynthSpec(const SynthSpec& spec, double duration_s,
                       int sample_rate_hz);

Waveform SynthSource(const SynthSpec& spec, double duration_s,
                     int sample_rate_hz = kDefaultSampleRate);

}  // namespace unisep

#endif  // UNISEP_SIGNAL_H_
