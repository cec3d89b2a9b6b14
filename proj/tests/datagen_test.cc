// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/datagen.h"

#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "unisep/error.h"
#include "unisep/masking.h"
#include "unisep/objectives.h"
#include "unisep/wav.h"

namespace unisep {
namespace {

constexpr int kRate = kDefaultSampleRate;

Waveform Tone(double seconds, double freq, double amp) {
  SynthSpec spec;
  spec.freq_hz = freq;
  spec.amplitude = amp;
  return SynthSource(spec, seconds);
}

Waveform Concat(const std::vector<Waveform>& parts) {
  Waveform out({}, kRate);
  for (const auto& p : parts) out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  return out;
}

Waveform Silence(double seconds) {
  return Waveform(std::vector<double>(static_cast<std::size_t>(std::lround(seconds * kRate)), 0.0), kRate);
}

TEST(Events, SilenceThenTone) {
  const EventList ev = DetectEvents(Concat({Silence(1.0), Tone(1.0, 440, 0.5)}));
  ASSERT_EQ(ev.event_times.size(), 1u);
  EXPECT_NEAR(static_cast<double>(ev.event_times[0]), 16000.0, 0.05 * kRate);
  EXPECT_FALSE(ev.silent);
}

TEST(Events, SteadyToneFallsBackToZero) {
  const EventList ev = DetectEvents(Tone(2.0, 440, 0.5));
  EXPECT_EQ(ev.event_times, std::vector<std::size_t>{0});
  EXPECT_FALSE(ev.silent);
}

TEST(Events, SilentFileFlagged) {
  const EventList ev = DetectEvents(Silence(1.0));
  EXPECT_EQ(ev.event_times, std::vector<std::size_t>{0});
  EXPECT_TRUE(ev.silent);
  EXPECT_THROW(DetectEvents(Waveform({}, kRate)), Error);
}

TEST(Events, RecallOnConstructedOnsets) {
  Rng rng(1);
  std::size_t truth = 0, found = 0;
  for (int file = 0; file < 30; ++file) {
    std::vector<Waveform> parts;
    std::vector<double> onsets;
    double t = 0.0;
    const int bursts = 1 + static_cast<int>(rng.UniformInt(4));
    for (int b = 0; b < bursts; ++b) {
      const double gap = rng.Uniform(0.5, 2.0), dur = rng.Uniform(0.3, 1.0);
      parts.push_back(Silence(gap));
      t += gap;
      onsets.push_back(t);
      parts.push_back(Tone(dur, rng.Uniform(200, 3000), rng.Uniform(0.4, 0.8)));
      t += dur;
    }
    parts.push_back(Silence(0.5));
    const EventList ev = DetectEvents(Concat(parts));
    for (double onset : onsets) {
      ++truth;
      for (std::size_t e : ev.event_times) {
        if (std::abs(static_cast<double>(e) / kRate - onset) <= 0.1) {
          ++found;
          break;
        }
      }
    }
  }
  EXPECT_GE(static_cast<double>(found) / truth, 0.95) << found << "/" << truth;
}

TEST(Clips, CenteredOnEvent) {
  Rng rng(2);
  const Waveform w = testing::RandomWaveform(rng, 10 * kRate);
  const Waveform clip = ExtractClip(w, 5 * kRate, ClipDraw{0.0, std::nullopt});
  ASSERT_EQ(clip.size(), 48000u);
  for (std::size_t i = 0; i < clip.size(); ++i) ASSERT_EQ(clip.samples[i], w.samples[56000 + i]);
}

TEST(Clips, ZeroPadsPastFileBounds) {
  Rng rng(3);
  const Waveform w = testing::RandomWaveform(rng, 4 * kRate);
  const Waveform clip = ExtractClip(w, 0, ClipDraw{0.25, std::nullopt});
  ASSERT_EQ(clip.size(), 48000u);
  const std::size_t lead = 24000 - 4000;
  for (std::size_t i = 0; i < lead; ++i) ASSERT_EQ(clip.samples[i], 0.0);
  for (std::size_t i = lead; i < clip.size(); ++i) ASSERT_EQ(clip.samples[i], w.samples[i - lead]);
}

TEST(Clips, ShortFileIsTiled) {
  Rng rng(4);
  const Waveform w = testing::RandomWaveform(rng, kRate);
  const Waveform clip = ExtractClip(w, 0, ClipDraw{0.0, 0.5});
  ASSERT_EQ(clip.size(), 48000u);
  for (std::size_t i = 0; i < kRate; ++i) {
    ASSERT_EQ(clip.samples[i], w.samples[i]);
    ASSERT_EQ(clip.samples[24000 + i], w.samples[i]);
  }
  for (std::size_t i = kRate; i < 24000; ++i) ASSERT_EQ(clip.samples[i], 0.0);
}

TEST(Clips, DrawsAndLengths) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.UniformInt(10 * kRate);
    const ClipDraw d = DrawClip(len, kRate, kClipLengthS, rng);
    EXPECT_GE(d.offset_s, 0.0);
    EXPECT_LE(d.offset_s, kMaxEventOffsetS);
    EXPECT_EQ(d.loop_gap_s.has_value(), len < 48000u);
    if (d.loop_gap_s) {
      EXPECT_GE(*d.loop_gap_s, 0.0);
      EXPECT_LE(*d.loop_gap_s, kMaxLoopGapS);
    }
    const Waveform w = testing::RandomWaveform(rng, len);
    EXPECT_EQ(ExtractClip(w, rng.UniformInt(len), d).size(), 48000u);
  }
}

Corpus SmallCorpus(std::size_t n, SyntheticPreset preset = SyntheticPreset::kDisjoint) {
  SyntheticCorpusOptions o;
  o.preset = preset;
  o.n_files = n;
  o.seed = 3;
  o.max_duration_s = 4.0;
  return MakeSyntheticCorpus(o);
}

TEST(Manifest, PartitionSizes) {
  const PartitionCounts c = PartitionSizes(10);
  EXPECT_EQ(c.train, 7u);
  EXPECT_EQ(c.validation, 2u);
  EXPECT_EQ(c.test, 1u);
  for (std::size_t n = 1; n < 200; ++n) {
    const PartitionCounts p = PartitionSizes(n);
    EXPECT_EQ(p.train + p.validation + p.test, n);
  }
  ManifestOptions o;
  o.n_train = 3;
  const DatasetManifest m = BuildManifest(SmallCorpus(10).files(), o);
  EXPECT_EQ(m.FileCount(Split::kTrain), 7u);
  EXPECT_EQ(m.FileCount(Split::kValidation), 2u);
  EXPECT_EQ(m.FileCount(Split::kTest), 1u);
}

TEST(Manifest, SplitsAreDisjointAndRecipesValid) {
  const Corpus corpus = SmallCorpus(30);
  for (bool groups : {false, true}) {
    for (std::size_t k : {2u, 3u}) {
      ManifestOptions o;
      o.sources = k;
      o.n_train = 20;
      o.n_validation = 6;
      o.n_test = 3;
      o.distinct_groups = groups && k == 2;
      const DatasetManifest m = BuildManifest(corpus.files(), o);
      std::map<std::string, Split> owner(m.partition.begin(), m.partition.end());
      EXPECT_EQ(owner.size(), 30u);
      EXPECT_EQ(m.MixtureCount(Split::kTrain), 20u);
      EXPECT_EQ(m.MixtureCount(Split::kValidation), 6u);
      EXPECT_EQ(m.MixtureCount(Split::kTest), 3u);
      for (const auto& r : m.recipes) {
        ASSERT_EQ(r.sources.size(), k);
        std::set<std::string> files, kinds;
        for (const auto& s : r.sources) {
          files.insert(s.file);
          kinds.insert(corpus.file(s.file).group);
          EXPECT_EQ(owner.at(s.file), r.split) << r.id;
        }
        EXPECT_EQ(files.size(), k) << r.id;
        if (o.distinct_groups) EXPECT_EQ(kinds.size(), k) << r.id;
      }
    }
  }
}

TEST(Manifest, DeterministicBytesAndRoundTrip) {
  testing::TempDir dir("manifest");
  const Corpus corpus = SmallCorpus(12);
  ManifestOptions o;
  o.n_train = 8;
  o.n_validation = 2;
  o.n_test = 2;
  o.seed = 7;
  o.gain_db_range = 6.0;
  const DatasetManifest a = BuildManifest(corpus.files(), o);
  const DatasetManifest b = BuildManifest(SmallCorpus(12).files(), o);
  WriteManifest(a, dir / "a.jsonl");
  WriteManifest(b, dir / "b.jsonl");
  EXPECT_EQ(testing::ReadAll(dir / "a.jsonl"), testing::ReadAll(dir / "b.jsonl"));
  const DatasetManifest c = ReadManifest(dir / "a.jsonl");
  EXPECT_EQ(ManifestToString(c), ManifestToString(a));
  o.seed = 8;
  EXPECT_NE(ManifestToString(BuildManifest(corpus.files(), o)), ManifestToString(a));
  EXPECT_THROW(ManifestFromString("{\"not\": \"a manifest\"}\n"), Error);
}

TEST(Manifest, TooFewFilesOrGroups) {
  ManifestOptions o;
  o.n_train = 2;
  o.sources = 3;
  EXPECT_THROW(BuildManifest(SmallCorpus(3).files(), o), Error);
  o.sources = 3;
  o.distinct_groups = true;
  EXPECT_THROW(BuildManifest(SmallCorpus(30).files(), o), Error);
  EXPECT_THROW(BuildManifest({}, o), Error);
}

TEST(Render, MixtureIsExactSumAndDeterministic) {
  const Corpus corpus = SmallCorpus(20);
  ManifestOptions o;
  o.n_train = 10;
  o.n_test = 4;
  o.distinct_groups = true;
  o.gain_db_range = 3.0;
  const DatasetManifest m = BuildManifest(corpus.files(), o);
  for (const auto* r : m.RecipesFor(Split::kTrain)) {
    const MixtureExample a = RenderMixture(*r, corpus);
    const MixtureExample b = RenderMixture(*r, corpus);
    ASSERT_EQ(a.mixture.size(), 48000u);
    EXPECT_EQ(a.mixture.samples, b.mixture.samples);
    for (std::size_t i = 0; i < a.mixture.size(); ++i) {
      double sum = 0.0;
      for (const auto& ref : a.references) sum += ref.samples[i];
      ASSERT_EQ(a.mixture.samples[i] - sum, 0.0);
    }
  }
}

TEST(Render, OnDiskReferencesAreExact) {
  testing::TempDir dir("render");
  const Corpus corpus = SmallCorpus(20);
  ManifestOptions o;
  o.n_train = 3;
  o.distinct_groups = true;
  const DatasetManifest m = BuildManifest(corpus.files(), o);
  for (const auto& ex : RenderSplit(m, corpus, Split::kTrain)) {
    WriteExample(ex, dir / ex.id);
    const MixtureExample back = ReadExample(dir / ex.id, 2, ex.id);
    EXPECT_EQ(back.id, ex.id);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(back.references[k].samples, ex.references[k].samples);
    for (std::size_t i = 0; i < ex.mixture.size(); ++i) {
      ASSERT_EQ(back.references[0].samples[i] + back.references[1].samples[i], ex.mixture.samples[i]);
      ASSERT_EQ(back.mixture.samples[i], static_cast<float>(ex.mixture.samples[i]));
    }
  }
}

TEST(Render, DisjointExamplesSeparateWithOracleMasks) {
  const Corpus corpus = SmallCorpus(20);
  ManifestOptions o;
  o.n_train = 6;
  o.distinct_groups = true;
  const DatasetManifest m = BuildManifest(corpus.files(), o);
  const FrameSpec spec = FrameSpec::FromWindowMs(10.0);
  for (const auto& ex : RenderSplit(m, corpus, Split::kTrain)) {
    const auto out = SeparateOracle(ex.mixture, ex.references, spec);
    double mean = 0.0;
    for (std::size_t k = 0; k < 2; ++k) mean += SiSdrImprovement(ex.references[k], out[k], ex.mixture) / 2;
    EXPECT_GE(mean, 20.0) << ex.id;
  }
}

TEST(Corpus, DirectoryRoundTripAndMissingFile) {
  testing::TempDir dir("corpus");
  const Corpus mem = SmallCorpus(6);
  mem.WriteTo(dir.str());
  const Corpus disk = Corpus::FromDirectory(dir.str());
  ASSERT_EQ(disk.files().size(), 6u);
  for (const auto& f : mem.files()) {
    const CorpusFile& g = disk.file(f.id);
    EXPECT_EQ(g.group, f.group);
    EXPECT_EQ(g.length, f.length);
    EXPECT_EQ(g.events, f.events);
    EXPECT_EQ(disk.Load(f.id).samples, mem.Load(f.id).samples);
  }
  const Corpus fewer = Corpus::FromDirectory(dir.str(), {mem.files()[0].id});
  EXPECT_EQ(fewer.files().size(), 5u);
  std::filesystem::remove(dir / mem.files()[1].id);
  EXPECT_THROW(disk.Load(mem.files()[1].id), Error);
  EXPECT_THROW(disk.file("no/such.wav"), Error);
}

TEST(Corpus, SyntheticPresets) {
  for (SyntheticPreset p : {SyntheticPreset::kDisjoint, SyntheticPreset::kTonal, SyntheticPreset::kMixed}) {
    EXPECT_EQ(ParseSyntheticPreset(SyntheticPresetName(p)), p);
    const Corpus c = SmallCorpus(8, p);
    ASSERT_EQ(c.files().size(), 8u);
    for (const auto& f : c.files()) {
      EXPECT_GE(f.length, static_cast<std::size_t>(kRate));
      EXPECT_LE(f.length, static_cast<std::size_t>(4 * kRate));
      EXPECT_FALSE(f.events.empty());
    }
  }
  std::set<std::string> groups;
  for (const auto& f : SmallCorpus(8).files()) groups.insert(f.group);
  EXPECT_EQ(groups, (std::set<std::string>{"noise", "tonal"}));
}

}  // namespace
}  // namespace unisep
