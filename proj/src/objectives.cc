// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/objectives.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "unisep/error.h"

namespace unisep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckSameLength(std::size_t a, std::size_t b) {
  UNISEP_CHECK(a == b, ErrorCode::kShapeMismatch,
               "signal lengths differ (" + std::to_string(a) + " vs " +
                   std::to_string(b) + ")");
}

}  // namespace

double SiSdr(std::span<const double> s, std::span<const double> s_hat) {
  CheckSameLength(s.size(), s_hat.size());
  double ss = 0.0, sh = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ss += s[i] * s[i];
    sh += s[i] * s_hat[i];
  }
  UNISEP_CHECK(ss > 0.0, ErrorCode::kInvalidArgument, "zero-energy reference");
  const double alpha = sh / ss;
  double target = 0.0, error = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = alpha * s[i];
    target += t * t;
    const double e = t - s_hat[i];
    error += e * e;
  }
  if (target == 0.0) return -kInf;
  if (error == 0.0) return kInf;
  return 10.0 * std::log10(target / error);
}

double SiSdr(const Waveform& reference, const Waveform& estimate) {
  return SiSdr(std::span<const double>(reference.samples),
               std::span<const double>(estimate.samples));
}

double SiSdrImprovement(const Waveform& reference, const Waveform& estimate,
                        const Waveform& mixture) {
  CheckSameLength(reference.size(), mixture.size());
  return SiSdr(reference, estimate) - SiSdr(reference, mixture);
}

double NegSnrLoss(const Waveform& reference, const Waveform& estimate,
                  double tau) {
  CheckSameLength(reference.size(), estimate.size());
  double signal = 0.0, error = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    signal += reference.samples[i] * reference.samples[i];
    const double e = reference.samples[i] - estimate.samples[i];
    error += e * e;
  }
  UNISEP_CHECK(signal > 0.0, ErrorCode::kInvalidArgument, "zero-energy reference");
  return -10.0 * std::log10(signal / (error + tau * signal));
}

std::vector<std::size_t> BestPermutation(const std::vector<double>& cost,
                                         std::size_t k) {
  UNISEP_CHECK(k >= 1 && k <= kMaxPitSources, ErrorCode::kInvalidArgument,
               "permutation search supports 1..4 sources");
  UNISEP_CHECK(cost.size() == k * k, ErrorCode::kShapeMismatch,
               "cost matrix must be K x K");
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = kInf;
  bool first = true;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += cost[i * k + perm[i]];
    if (first || total < best_cost) {
      best_cost = total;
      best = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

PitResult PitLoss(const std::vector<Waveform>& references,
                  const std::vector<Waveform>& estimates,
                  const PairwiseLoss& pairwise_loss) {
  const std::size_t k = references.size();
  UNISEP_CHECK(k == estimates.size(), ErrorCode::kShapeMismatch,
               "reference and estimate counts differ");
  UNISEP_CHECK(k >= 1, ErrorCode::kInvalidArgument, "need at least one source");
  PitResult result;
  result.per_pair_losses.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      result.per_pair_losses[i * k + j] = pairwise_loss(references[j], estimates[i]);
    }
  }
  result.permutation = BestPermutation(result.per_pair_losses, k);
  for (std::size_t i = 0; i < k; ++i) {
    result.loss += result.per_pair_losses[i * k + result.permutation[i]];
  }
  return result;
}

}  // namespace unisep
