// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/objectives.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "unisep/error.h"

namespace unisep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Waveform W(std::vector<double> v) { return Waveform(std::move(v), 16000); }

// Direct evaluation of the SI-SDR definition.
double SiSdrOracle(const std::vector<double>& s, const std::vector<double>& e) {
  const double alpha = testing::Dot(s, e) / testing::Dot(s, s);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += (alpha * s[i]) * (alpha * s[i]);
    den += (alpha * s[i] - e[i]) * (alpha * s[i] - e[i]);
  }
  return 10.0 * std::log10(num / den);
}

TEST(SiSdr, HandCases) {
  EXPECT_NEAR(SiSdr(W({1, 0}), W({1, 1})), 0.0, 1e-9);
  EXPECT_NEAR(SiSdrImprovement(W({1, 0}), W({1, 0.5}), W({1, 1})),
              10.0 * std::log10(4.0), 1e-9);
  EXPECT_NEAR(SiSdr(W({1, 0}), W({1, 0.5})), 10.0 * std::log10(4.0), 1e-9);
}

TEST(SiSdr, Sentinels) {
  EXPECT_EQ(SiSdr(W({1, 2, 3}), W({1, 2, 3})), kInf);
  EXPECT_EQ(SiSdr(W({1, 2, 3}), W({2, 4, 6})), kInf);
  EXPECT_EQ(SiSdr(W({1, 0}), W({0, 1})), -kInf);
  EXPECT_EQ(SiSdrImprovement(W({1, 0}), W({1, 0}), W({1, 1})), kInf);
  EXPECT_NEAR(SiSdrImprovement(W({1, 0}), W({1, 1}), W({1, 1})), 0.0, 1e-12);
}

TEST(SiSdr, MatchesOracleAndScaleInvariance) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.UniformInt(300);
    const auto s = testing::RandomVector(rng, n);
    const auto e = testing::RandomVector(rng, n);
    const double base = SiSdr(s, e);
    EXPECT_NEAR(base, SiSdrOracle(s, e), 1e-9);
    const double a = rng.Uniform(0.1, 10.0), b = rng.Uniform(0.1, 10.0);
    std::vector<double> sa(s), eb(e);
    for (double& v : sa) v *= a;
    for (double& v : eb) v *= b;
    EXPECT_NEAR(SiSdr(sa, e), base, 1e-9);
    EXPECT_NEAR(SiSdr(s, eb), base, 1e-9);
    EXPECT_NEAR(SiSdr(sa, eb), base, 1e-9);
  }
}

TEST(SiSdr, RejectsMismatchedLengths) {
  EXPECT_THROW(SiSdr(W({1, 2}), W({1, 2, 3})), Error);
}

TEST(NegSnr, HandCases) {
  EXPECT_NEAR(NegSnrLoss(W({1, 0, 0}), W({0, 0, 0})), 0.0, 1e-7);
  EXPECT_NEAR(NegSnrLoss(W({1, 0, 0}), W({1, 0, 0})), -80.0, 1e-9);
  EXPECT_NEAR(NegSnrLoss(W({1, 0, 0}), W({1, 0, 0}), 1e-3), -30.0, 1e-9);
}

TEST(NegSnr, MonotoneAlongLineAndBounded) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = testing::RandomVector(rng, 50);
    double prev = kInf;
    for (int i = 0; i <= 100; ++i) {
      std::vector<double> e(y);
      for (double& v : e) v *= i / 100.0;
      const double loss = NegSnrLoss(W(y), W(e));
      EXPECT_LT(loss, prev);
      EXPECT_GE(loss, 10.0 * std::log10(kDefaultSnrStabilizer) - 1e-9);
      prev = loss;
    }
  }
}

std::vector<double> CostMatrix(const std::vector<Waveform>& refs, const std::vector<Waveform>& ests,
                               const PairwiseLoss& f) {
  const std::size_t k = refs.size();
  std::vector<double> c(k * k);
  for (std::size_t e = 0; e < k; ++e)
    for (std::size_t r = 0; r < k; ++r) c[e * k + r] = f(refs[r], ests[e]);
  return c;
}

TEST(Pit, SingleSource) {
  const std::vector<Waveform> refs = {W({1, 2, 3})}, ests = {W({1, 2, 2})};
  const PitResult r = PitLoss(refs, ests, [](const Waveform& a, const Waveform& b) {
    return NegSnrLoss(a, b);
  });
  EXPECT_EQ(r.permutation, std::vector<std::size_t>{0});
  EXPECT_EQ(r.loss, NegSnrLoss(refs[0], ests[0]));
}

TEST(Pit, ReversedEstimates) {
  Rng rng(3);
  for (std::size_t k : {2u, 3u, 4u}) {
    std::vector<Waveform> refs;
    for (std::size_t i = 0; i < k; ++i) refs.push_back(testing::RandomWaveform(rng, 64));
    std::vector<Waveform> ests(refs.rbegin(), refs.rend());
    for (auto& e : ests)
      for (double& v : e.samples) v += 0.01 * rng.Normal();
    const PairwiseLoss f = [](const Waveform& a, const Waveform& b) { return NegSnrLoss(a, b); };
    const PitResult r = PitLoss(refs, ests, f);
    std::vector<Waveform> unreversed(ests.rbegin(), ests.rend());
    double identity = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_EQ(r.permutation[i], k - 1 - i);
      identity += f(refs[i], unreversed[i]);
    }
    EXPECT_NEAR(r.loss, identity, 1e-12);
  }
}

TEST(Pit, MatchesBruteForce) {
  Rng rng(4);
  const PairwiseLoss f = [](const Waveform& a, const Waveform& b) { return NegSnrLoss(a, b); };
  for (std::size_t k : {2u, 3u}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Waveform> refs, ests;
      for (std::size_t i = 0; i < k; ++i) {
        refs.push_back(testing::RandomWaveform(rng, 16));
        ests.push_back(testing::RandomWaveform(rng, 16));
      }
      const PitResult r = PitLoss(refs, ests, f);
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      double best = kInf;
      do {
        double s = 0.0;
        for (std::size_t e = 0; e < k; ++e) s += f(refs[perm[e]], ests[e]);
        best = std::min(best, s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      EXPECT_EQ(r.loss, best);
      EXPECT_EQ(r.per_pair_losses, CostMatrix(refs, ests, f));
    }
  }
}

TEST(Pit, TiesPickFirstPermutation) {
  EXPECT_EQ(BestPermutation(std::vector<double>(9, 1.0), 3),
            (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Pit, RejectsBadInputs) {
  const PairwiseLoss f = [](const Waveform& a, const Waveform& b) { return NegSnrLoss(a, b); };
  EXPECT_THROW(PitLoss({W({1})}, {W({1}), W({2})}, f), Error);
  std::vector<Waveform> many(kMaxPitSources + 1, W({1, 2}));
  EXPECT_THROW(PitLoss(many, many, f), Error);
}

}  // namespace
}  // namespace unisep
