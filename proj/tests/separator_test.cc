// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/separator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "unisep/datagen.h"
#include "unisep/error.h"
#include "unisep/objectives.h"

namespace unisep {
namespace {

using testing::MaxAbsDiff;
using testing::RandomWaveform;

TdcnConfig SmallConfig(BasisKind basis) {
  TdcnConfig c;
  c.basis_kind = basis;
  c.frame_spec = FrameSpec::FromWindowMs(2.5);
  c.n_basis = 16;
  c.bottleneck = 12;
  c.conv_channels = 24;
  c.skip_channels = 12;
  c.blocks_per_repeat = 3;
  c.repeats = 2;
  return c;
}

std::vector<MixtureExample> ToyExamples(std::size_t n_mixtures, std::uint64_t seed) {
  SyntheticCorpusOptions co;
  co.preset = SyntheticPreset::kDisjoint;
  co.n_files = 20;
  co.seed = seed;
  co.max_duration_s = 3.0;
  const Corpus corpus = MakeSyntheticCorpus(co);
  ManifestOptions mo;
  mo.n_train = n_mixtures;
  mo.seed = seed;
  mo.clip_len_s = 1.0;
  mo.distinct_groups = true;
  return RenderSplit(BuildManifest(corpus.files(), mo), corpus, Split::kTrain);
}

Waveform SumOf(const std::vector<Waveform>& parts) {
  Waveform out(std::vector<double>(parts[0].size(), 0.0), parts[0].sample_rate_hz);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.size(); ++i) out.samples[i] += p.samples[i];
  return out;
}

class BothBases : public ::testing::TestWithParam<BasisKind> {};

TEST_P(BothBases, OutputsAreConsistentAndSized) {
  Rng rng(1);
  for (bool iterative : {false, true}) {
    const SeparationModel model = InitModel(SmallConfig(GetParam()), iterative, 3);
    for (std::size_t len : {1u, 333u, 4000u}) {
      const Waveform x = RandomWaveform(rng, len);
      std::vector<std::vector<Waveform>> all;
      if (iterative) {
        all = ItdcnForward(model, x);
      } else {
        all.push_back(Separate(model, x));
      }
      EXPECT_EQ(ForwardModel(model, x).size(), iterative ? 2u : 1u);
      for (const auto& est : all) {
        ASSERT_EQ(est.size(), 2u);
        for (const auto& e : est) EXPECT_EQ(e.size(), len);
        EXPECT_LT(MaxAbsDiff(SumOf(est).samples, x.samples), 1e-9);
      }
      EXPECT_EQ(Separate(model, x)[0].samples, all.back()[0].samples);
    }
  }
}

TEST_P(BothBases, UntrainedOutputsFiniteOverSeeds) {
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SeparationModel model = InitModel(SmallConfig(GetParam()), seed % 2 == 1, seed);
    const Waveform x = RandomWaveform(rng, 800, rng.Uniform(0.01, 1.0));
    for (const auto& e : Separate(model, x))
      for (double v : e.samples) ASSERT_TRUE(std::isfinite(v)) << "seed " << seed;
  }
}

TEST_P(BothBases, StageTwoSeesMixtureAndEstimates) {
  const TdcnConfig c = SmallConfig(GetParam());
  const SeparationModel model = InitModel(c, true, 5);
  ASSERT_TRUE(model.stage2.has_value());
  EXPECT_EQ(model.stage2->input_dim, (c.sources + 1) * c.feature_dim());
  EXPECT_EQ(model.stage1.input_dim, c.feature_dim());
  EXPECT_FALSE(InitModel(c, false, 5).stage2.has_value());
}

TEST_P(BothBases, LossInvariantToReferenceOrder) {
  const auto examples = ToyExamples(4, 3);
  SeparationModel model = InitModel(SmallConfig(GetParam()), true, 7);
  MixtureExample ex = examples[0];
  const auto params = model.Parameters();

  ag::ZeroGrad(params);
  const PitTensorLoss a = ModelLoss(model, ex);
  ag::Backward(a.loss);
  std::vector<std::vector<double>> grads;
  for (const auto& p : params) grads.push_back(p.grad());

  std::reverse(ex.references.begin(), ex.references.end());
  ag::ZeroGrad(params);
  const PitTensorLoss b = ModelLoss(model, ex);
  ag::Backward(b.loss);
  EXPECT_NEAR(a.loss.item(), b.loss.item(), 1e-12 * std::abs(a.loss.item()));
  EXPECT_EQ(a.permutation[0], b.permutation[1]);
  EXPECT_EQ(a.permutation[1], b.permutation[0]);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double scale = 1e-12;
    for (double g : grads[i]) scale = std::max(scale, std::abs(g));
    EXPECT_LT(MaxAbsDiff(params[i].grad(), grads[i]), 1e-9 * scale) << i;
  }
}

TEST_P(BothBases, SaveLoadRoundTrip) {
  testing::TempDir dir("model");
  Rng rng(4);
  const SeparationModel model = InitModel(SmallConfig(GetParam()), true, 11);
  SaveModel(model, dir / "m.ckpt");
  const SeparationModel loaded = LoadModel(dir / "m.ckpt");
  EXPECT_EQ(loaded.config, model.config);
  EXPECT_EQ(loaded.iterative, model.iterative);
  const Waveform x = RandomWaveform(rng, 1000);
  const auto a = Separate(model, x), b = Separate(loaded, x);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].samples, b[k].samples);
}

INSTANTIATE_TEST_SUITE_P(Separator, BothBases,
                         ::testing::Values(BasisKind::kStft, BasisKind::kLearned),
                         [](const auto& info) { return std::string(BasisKindName(info.param)); });

TEST(BasisLayers, LearnedEncodeDecodeMatchTransforms) {
  Rng rng(5);
  const SeparationModel model = InitModel(SmallConfig(BasisKind::kLearned), false, 2);
  const FrameSpec spec = model.config.frame_spec;
  LearnedBasis basis;
  basis.spec = spec;
  basis.n_basis = model.config.n_basis;
  basis.analysis = model.analysis.value();
  basis.synthesis = model.synthesis.value();
  const Waveform x = RandomWaveform(rng, 777);
  const CoeffFrames ref = LearnedAnalysis(x, basis);
  const ag::Tensor enc = LearnedEncode(ag::Tensor::Constant({x.size()}, x.samples), model.analysis, spec);
  ASSERT_EQ(enc.shape(), (ag::Shape{basis.n_basis, ref.frames}));
  for (std::size_t n = 0; n < basis.n_basis; ++n)
    for (std::size_t t = 0; t < ref.frames; ++t)
      EXPECT_NEAR(enc.value()[n * ref.frames + t], ref.at(t, n).real(), 1e-12);
  const ag::Tensor dec = LearnedDecode(enc, model.synthesis, spec, x.size());
  EXPECT_LT(MaxAbsDiff(dec.value(), LearnedSynthesis(ref, basis, x.size()).samples), 1e-12);
}

TEST(BasisLayers, UnitMaskedIstftIsIstft) {
  Rng rng(6);
  const FrameSpec spec = FrameSpec::FromWindowMs(5.0);
  const Waveform x = RandomWaveform(rng, 1500);
  const CoeffFrames c = Stft(x, spec);
  const ag::Tensor ones = ag::Tensor::Constant({c.n_bins, c.frames},
                                               std::vector<double>(c.n_bins * c.frames, 1.0));
  const ag::Tensor y = MaskedIstft(ones, c.data, spec, x.size());
  EXPECT_LT(MaxAbsDiff(y.value(), Istft(c, x.size()).samples), 1e-12);
  EXPECT_LT(MaxAbsDiff(y.value(), x.samples), 1e-10);
}

TEST(BasisLayers, LogMagnitudeFeatures) {
  Rng rng(7);
  const FrameSpec spec = FrameSpec::FromWindowMs(2.5);
  const Waveform x = RandomWaveform(rng, 400);
  const CoeffFrames c = Stft(x, spec);
  const ag::Tensor f = StftLogMagnitude(ag::Tensor::Constant({x.size()}, x.samples), spec);
  ASSERT_EQ(f.shape(), (ag::Shape{c.n_bins, c.frames}));
  for (std::size_t k = 0; k < c.n_bins; ++k)
    for (std::size_t t = 0; t < c.frames; ++t)
      EXPECT_NEAR(f.value()[k * c.frames + t], std::log(std::abs(c.at(t, k)) + kLogMagnitudeOffset),
                  1e-12);
}

TEST(Loss, NegSnrTensorMatchesScalar) {
  Rng rng(8);
  const Waveform y = RandomWaveform(rng, 100), e = RandomWaveform(rng, 100);
  EXPECT_NEAR(NegSnrLossTensor(y, ag::Tensor::Constant({100}, e.samples)).item(), NegSnrLoss(y, e),
              1e-12);
}

TEST(Training, DeterministicGivenSeed) {
  const auto examples = ToyExamples(6, 4);
  TrainOptions opts;
  opts.steps = 4;
  opts.crop_s = 0.1;
  opts.seed = 9;
  std::vector<TrainLogRow> log_a, log_b;
  const SeparationModel a = Train(SmallConfig(BasisKind::kStft), false, examples, opts, &log_a);
  const SeparationModel b = Train(SmallConfig(BasisKind::kStft), false, examples, opts, &log_b);
  ASSERT_EQ(log_a.size(), 4u);
  for (std::size_t i = 0; i < log_a.size(); ++i) {
    EXPECT_EQ(log_a[i].step, i + 1);
    EXPECT_EQ(log_a[i].loss, log_b[i].loss);
    EXPECT_EQ(log_a[i].permutations, log_b[i].permutations);
  }
  const auto pa = a.Parameters(), pb = b.Parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].value(), pb[i].value());
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

TEST(Training, LossFallsAndPermutationsBalance) {
  const auto examples = ToyExamples(40, 5);
  TrainOptions opts;
  opts.steps = 210;
  opts.crop_s = 0.25;
  opts.seed = 3;
  opts.adam.learning_rate = 2e-3;
  std::vector<TrainLogRow> log;
  Train(SmallConfig(BasisKind::kStft), false, examples, opts, &log);
  ASSERT_EQ(log.size(), 210u);
  std::vector<double> early, late;
  for (std::size_t i = 0; i < 20; ++i) early.push_back(log[i].loss);
  for (std::size_t i = 190; i < 210; ++i) late.push_back(log[i].loss);
  EXPECT_LT(Median(late), Median(early));

  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& row : log)
    for (const auto& p : row.permutations) {
      ++counts[p];
      ++total;
    }
  const double share = static_cast<double>(counts[{0, 1}]) / static_cast<double>(total);
  EXPECT_GE(total, 400u);
  EXPECT_GE(share, 0.35);
  EXPECT_LE(share, 0.65);
}

TEST(Training, RejectsBadInput) {
  TrainOptions opts;
  opts.steps = 1;
  EXPECT_THROW(Train(SmallConfig(BasisKind::kStft), false, {}, opts), Error);
}

}  // namespace
}  // namespace unisep
