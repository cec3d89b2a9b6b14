// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Differentiable operator set. There is no implicit broadcasting: every
// op states the shapes it accepts and throws kShapeMismatch (naming the op
// and the offending shapes) otherwise.

#ifndef UNISEP_AUTOGRAD_OPS_H_
#define UNISEP_AUTOGRAD_OPS_H_

#include <vector>

#include "unisep/autograd/tensor.h"

namespace unisep::ag {

// [m x k] * [k x n] -> [m x n]
Tensor MatMul(const Tensor& a, const Tensor& b);
// x [m x n] + bias [m] broadcast along columns.
Tensor AddRowBias(const Tensor& x, const Tensor& bias);

// Valid (unpadded) convolution. x [Cin x L], w [Cout x Cin x P] ->
// [Cout x ((L - dilation*(P-1) - 1) / stride + 1)].
Tensor Conv1d(const Tensor& x, const Tensor& w, std::size_t stride,
              std::size_t dilation = 1);
// Per-channel "same" convolution, odd P: x [C x T], w [C x P] -> [C x T];
// tap p reads x[c, t + (p - (P-1)/2) * dilation], zero outside.
Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, std::size_t dilation);
// x [Cin x T], w [Cin x Cout x P] -> [Cout x ((T-1)*stride + P)].
Tensor TransposedConv1d(const Tensor& x, const Tensor& w, std::size_t stride);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, double c);
Tensor AddConst(const Tensor& x, double c);
// x * s for a single-element learnable s.
Tensor ScaleByParam(const Tensor& x, const Tensor& s);

Tensor Relu(const Tensor& x);
// max(0, x) + slope * min(0, x), single-element slope.
Tensor Prelu(const Tensor& x, const Tensor& slope);
Tensor Sigmoid(const Tensor& x);

// Per-channel normalization over the frame axis: x [C x T], gamma/beta [C].
Tensor FeatureNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   double eps = 1e-8);

Tensor ReduceSum(const Tensor& x);
Tensor Log10(const Tensor& x);

Tensor Concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor Slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor Pad(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after);
Tensor Transpose(const Tensor& x);
Tensor Reshape(const Tensor& x, Shape shape);

// frames [T x W] -> [(T-1)*hop + W], summing overlaps.
Tensor OverlapAdd(const Tensor& frames, std::size_t hop);
// signal [L] -> [T x W] with T = (L - W) / hop + 1; adjoint of OverlapAdd.
Tensor Frame(const Tensor& signal, std::size_t window, std::size_t hop);

}  // namespace unisep::ag

#endif  // UNISEP_AUTOGRAD_OPS_H_
