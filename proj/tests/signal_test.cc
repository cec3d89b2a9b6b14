// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/signal.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "unisep/error.h"
#include "unisep/fft.h"

namespace unisep {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(Rng, DerivedStreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 32; ++i) first.insert(Rng::Derive(7, i).NextU64());
  EXPECT_EQ(first.size(), 32u);
  EXPECT_EQ(Rng::Derive(7, 3).NextU64(), Rng::Derive(7, 3).NextU64());
}

TEST(Rng, UniformAndIntRanges) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.UniformInt(7), 7u);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> v(1 + rng.UniformInt(20));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
    rng.Shuffle(v);
    std::multiset<int> seen(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(seen.count(static_cast<int>(i)), 1u);
  }
}

TEST(Synth, ToneClosedForm) {
  SynthSpec spec;
  spec.kind = SynthKind::kTone;
  spec.freq_hz = 440.0;
  spec.amplitude = 0.5;
  const Waveform w = SynthSource(spec, 1.0, 16000);
  ASSERT_EQ(w.size(), 16000u);
  for (std::size_t n = 0; n < w.size(); ++n) {
    EXPECT_NEAR(w.samples[n], 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * n / 16000.0),
                1e-12);
  }
}

TEST(Synth, Deterministic) {
  for (SynthKind kind : {SynthKind::kTone, SynthKind::kChirp, SynthKind::kBandNoise,
                         SynthKind::kImpulseTrain, SynthKind::kSilenceThenBurst}) {
    SynthSpec spec;
    spec.kind = kind;
    spec.freq_hz = 300.0;
    spec.freq2_hz = 900.0;
    spec.onset_s = 0.2;
    spec.burst_s = 0.3;
    spec.seed = 99;
    EXPECT_EQ(SynthSource(spec, 0.75).samples, SynthSource(spec, 0.75).samples)
        << SynthKindName(kind);
  }
}

TEST(Synth, BandNoiseEnergyInBand) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthSpec spec;
    spec.kind = SynthKind::kBandNoise;
    spec.freq_hz = 2000.0;
    spec.freq2_hz = 3000.0;
    spec.seed = seed;
    const Waveform w = SynthSource(spec, 1.0, 16000);
    const std::size_t n_fft = NextPowerOfTwo(w.size());
    const auto spectrum = RealFft(w.samples, n_fft);
    double total = 0.0, inside = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double e = std::norm(spectrum[k]);
      const double f = static_cast<double>(k) * 16000.0 / n_fft;
      total += e;
      if (f >= 2000.0 && f <= 3000.0) inside += e;
    }
    EXPECT_GE(inside / total, 0.95) << "seed " << seed;
  }
}

TEST(Synth, SilenceThenBurstStartsAtOnset) {
  SynthSpec spec;
  spec.kind = SynthKind::kSilenceThenBurst;
  spec.freq_hz = 500.0;
  spec.onset_s = 0.5;
  spec.burst_s = 0.25;
  const Waveform w = SynthSource(spec, 1.0);
  for (std::size_t i = 0; i < 8000; ++i) ASSERT_EQ(w.samples[i], 0.0);
  for (std::size_t i = 12000; i < w.size(); ++i) ASSERT_EQ(w.samples[i], 0.0);
  double energy = 0.0;
  for (std::size_t i = 8000; i < 12000; ++i) energy += w.samples[i] * w.samples[i];
  EXPECT_GT(energy, 1.0);
}

TEST(Synth, RejectsInvalidSpecs) {
  SynthSpec spec;
  spec.freq_hz = 9000.0;
  EXPECT_THROW(SynthSource(spec, 1.0, 16000), Error);
  spec.freq_hz = 400.0;
  spec.amplitude = 1.5;
  EXPECT_THROW(SynthSource(spec, 1.0, 16000), Error);
  spec.amplitude = 0.5;
  EXPECT_THROW(SynthSource(spec, -1.0, 16000), Error);
  spec.kind = SynthKind::kBandNoise;
  spec.freq2_hz = 300.0;
  EXPECT_THROW(SynthSource(spec, 1.0, 16000), Error);
}

TEST(Synth, KindNamesRoundTrip) {
  for (SynthKind kind : {SynthKind::kTone, SynthKind::kChirp, SynthKind::kBandNoise,
                         SynthKind::kImpulseTrain, SynthKind::kSilenceThenBurst}) {
    EXPECT_EQ(ParseSynthKind(SynthKindName(kind)), kind);
  }
  EXPECT_THROW(ParseSynthKind("whistle"), Error);
}

}  // namespace
}  // namespace unisep
