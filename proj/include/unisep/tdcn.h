// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// TDCN++ masking network.
//
// Layout is channels x frames throughout. A block is
//   dense B->H (scale) -> prelu -> norm -> depthwise dilated conv -> prelu
//   -> norm -> { dense H->B (scale gamma2), dense H->Sc (scale) }
// with the residual added to the block input and the skip branch summed
// over all blocks. Block L (zero-based, counted across repeats) starts
// with gamma2 = 0.9^L; every other scale starts at 1. The input of repeat
// r is projected by one dense B->B layer per later repeat and added to that
// repeat's input. The summed skips go through prelu, a dense Sc->K*N layer
// and a sigmoid to give K masks.

#ifndef UNISEP_TDCN_H_
#define UNISEP_TDCN_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unisep/autograd/tensor.h"
#include "unisep/transforms.h"

namespace unisep {

enum class BasisKind { kStft, kLearned };

const char* BasisKindName(BasisKind kind);
BasisKind ParseBasisKind(const std::string& name);

constexpr double kResidualScaleDecay = 0.9;

struct TdcnConfig {
  std::size_t n_basis = 64;  // learned basis size; STFT uses fft_len/2+1
  std::size_t bottleneck = 32;
  std::size_t conv_channels = 64;
  std::size_t skip_channels = 32;
  std::size_t kernel = 3;
  std::size_t blocks_per_repeat = 4;
  std::size_t repeats = 2;
  std::size_t sources = 2;
  BasisKind basis_kind = BasisKind::kStft;
  FrameSpec frame_spec = FrameSpec::FromWindowMs(5.0);
  // Feature-wise normalization over frames. Disabling it makes every mask
  // frame depend only on a finite neighbourhood of input frames.
  bool feature_norm = true;

  // Coefficient bins N seen (and masked) by the network.
  std::size_t feature_dim() const {
    return basis_kind == BasisKind::kStft ? frame_spec.NumBins() : n_basis;
  }
  std::size_t total_blocks() const { return blocks_per_repeat * repeats; }

  bool operator==(const TdcnConfig&) const = default;
};

void ValidateTdcnConfig(const TdcnConfig& config);

struct DenseParams {
  ag::Tensor weight;  // out x in
  ag::Tensor bias;    // out
  ag::Tensor scale;   // 1
};

struct NormParams {
  ag::Tensor gamma;
  ag::Tensor beta;
};

struct TdcnBlockParams {
  std::size_t index = 0;  // global block index L
  std::size_t dilation = 1;
  DenseParams in_proj;
  ag::Tensor prelu1;
  NormParams norm1;
  ag::Tensor dw_weight;  // H x P
  ag::Tensor dw_bias;    // H
  ag::Tensor prelu2;
  NormParams norm2;
  DenseParams residual;
  DenseParams skip;
};

struct TdcnParams {
  std::size_t input_dim = 0;
  NormParams input_norm;
  DenseParams input_proj;
  std::vector<TdcnBlockParams> blocks;
  // Repeat links in (destination, source) order: for dst = 1..R-1, for
  // src = 0..dst-1.
  std::vector<DenseParams> repeat_links;
  ag::Tensor out_prelu;
  DenseParams output;

  std::vector<std::pair<std::string, ag::Tensor>> Named() const;
  std::vector<ag::Tensor> Parameters() const;
};

// Deterministic given the seed. Weights are uniform in +-1/sqrt(fan_in),
// biases zero, norm gains one, prelu slopes 0.25.
TdcnParams TdcnInit(const TdcnConfig& config, std::size_t input_dim,
                    std::uint64_t seed);

// features [input_dim x T] -> K masks, each [N x T] with values in (0, 1).
std::vector<ag::Tensor> TdcnForward(const TdcnParams& params,
                                    const TdcnConfig& config,
                                    const ag::Tensor& features);

}  // namespace unisep

#endif  // UNISEP_TDCN_H_
