// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_MASKING_H_
#define UNISEP_MASKING_H_

#include <vector>

#include "unisep/signal.h"
#include "unisep/transforms.h"

namespace unisep {

// K x frames x bins, row-major; every value in [0, 1].
struct MaskSet {
  std::size_t sources = 0;
  std::size_t frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> values;

  double& at(std::size_t k, std::size_t t, std::size_t n) {
    return values[(k * frames + t) * n_bins + n];
  }
  double at(std::size_t k, std::size_t t, std::size_t n) const {
    return values[(k * frames + t) * n_bins + n];
  }
};

// estimate_k[t, n] = mask[k, t, n] * mixture[t, n]. Real masks scale the
// complex STFT value without touching its phase.
std::vector<CoeffFrames> ApplyMasks(const MaskSet& masks,
                                    const CoeffFrames& mixture_coeffs);

// Uniform projection onto {sum_k s_k = x}: s'_k = s_k + (x - sum_j s_j) / K.
std::vector<Waveform> MixtureConsistency(const std::vector<Waveform>& estimates,
                                         const Waveform& mixture);

// One-hot over sources per (t, n): the source with the largest magnitude
// wins; ties go to the lowest index.
MaskSet OracleBinaryMask(const std::vector<CoeffFrames>& reference_coeffs,
                         const FrameSpec& spec);

std::vector<Waveform> SeparateOracle(const Waveform& mixture,
                                     const std::vector<Waveform>& references,
                                     const FrameSpec& spec);

}  // namespace unisep

#endif  // UNISEP_MASKING_H_
