// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_OBJECTIVES_H_
#define UNISEP_OBJECTIVES_H_

#include <functional>
#include <span>
#include <vector>

#include "unisep/signal.h"

namespace unisep {

constexpr double kDefaultSnrStabilizer = 1e-8;
constexpr std::size_t kMaxPitSources = 4;

// Scale-invariant SDR in dB. The optimal reference scale is
// alpha = <s, s_hat> / |s|^2. Returns +inf when the residual is exactly
// zero and -inf when the projected target energy is zero.
double SiSdr(const Waveform& reference, const Waveform& estimate);
double SiSdr(std::span<const double> reference, std::span<const double> estimate);

double SiSdrImprovement(const Waveform& reference, const Waveform& estimate,
                        const Waveform& mixture);

// -10 log10(|y|^2 / (|y - y_hat|^2 + tau |y|^2)). Bounded below by
// 10 log10(tau).
double NegSnrLoss(const Waveform& reference, const Waveform& estimate,
                  double tau = kDefaultSnrStabilizer);

struct PitResult {
  double loss = 0.0;
  // permutation[k] is the reference assigned to estimate k.
  std::vector<std::size_t> permutation;
  // per_pair_losses[k * K + j] = pairwise_loss(reference j, estimate k).
  std::vector<double> per_pair_losses;
};

using PairwiseLoss = std::function<double(const Waveform& reference,
                                          const Waveform& estimate)>;

// Exhaustive minimization of sum_k cost[k * K + perm[k]] over all K!
// bijections. Ties resolve to the lexicographically first permutation.
std::vector<std::size_t> BestPermutation(const std::vector<double>& cost,
                                         std::size_t k);

PitResult PitLoss(const std::vector<Waveform>& references,
                  const std::vector<Waveform>& estimates,
                  const PairwiseLoss& pairwise_loss);

}  // namespace unisep

#endif  // UNISEP_OBJECTIVES_H_
