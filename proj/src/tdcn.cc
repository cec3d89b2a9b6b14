// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/tdcn.h"

#include <cmath>

#include "unisep/autograd/ops.h"
#include "unisep/error.h"
#include "unisep/signal.h"

namespace unisep {

const char* BasisKindName(BasisKind kind) {
  return kind == BasisKind::kStft ? "stft" : "learned";
}

BasisKind ParseBasisKind(const std::string& name) {
  if (name == "stft") return BasisKind::kStft;
  if (name == "learned") return BasisKind::kLearned;
  throw Error(ErrorCode::kInvalidArgument, "unknown basis kind '" + name + "'");
}

void ValidateTdcnConfig(const TdcnConfig& c) {
  ValidateFrameSpec(c.frame_spec);
  UNISEP_CHECK(c.n_basis > 0 && c.bottleneck > 0 && c.conv_channels > 0 &&
                   c.skip_channels > 0 && c.blocks_per_repeat > 0 && c.repeats > 0 &&
                   c.sources > 0,
               ErrorCode::kInvalidArgument, "network sizes must be positive");
  UNISEP_CHECK(c.kernel % 2 == 1, ErrorCode::kInvalidArgument,
               "depthwise kernel must have an odd number of taps");
}

namespace {

ag::Tensor UniformParam(ag::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(ag::NumElements(shape));
  for (double& x : v) x = rng.Uniform(-bound, bound);
  return ag::Tensor::Parameter(std::move(shape), std::move(v));
}

ag::Tensor FilledParam(ag::Shape shape, double value) {
  std::vector<double> v(ag::NumElements(shape), value);
  return ag::Tensor::Parameter(std::move(shape), std::move(v));
}

DenseParams MakeDense(std::size_t in, std::size_t out, double scale, Rng& rng) {
  return {UniformParam({out, in}, in, rng), FilledParam({out}, 0.0),
          FilledParam({1}, scale)};
}

NormParams MakeNorm(std::size_t ch) {
  return {FilledParam({ch}, 1.0), FilledParam({ch}, 0.0)};
}

ag::Tensor ApplyDense(const DenseParams& p, const ag::Tensor& x) {
  return ag::ScaleByParam(ag::AddRowBias(ag::MatMul(p.weight, x), p.bias), p.scale);
}

void AddDense(std::vector<std::pair<std::string, ag::Tensor>>& out,
              const std::string& prefix, const DenseParams& p) {
  out.emplace_back(prefix + ".weight", p.weight);
  out.emplace_back(prefix + ".bias", p.bias);
  out.emplace_back(prefix + ".scale", p.scale);
}

void AddNorm(std::vector<std::pair<std::string, ag::Tensor>>& out,
             const std::string& prefix, const NormParams& p) {
  out.emplace_back(prefix + ".gamma", p.gamma);
  out.emplace_back(prefix + ".beta", p.beta);
}

}  // namespace

std::vector<std::pair<std::string, ag::Tensor>> TdcnParams::Named() const {
  std::vector<std::pair<std::string, ag::Tensor>> out;
  AddNorm(out, "input_norm", input_norm);
  AddDense(out, "input_proj", input_proj);
  for (const auto& b : blocks) {
    const std::string p = "block" + std::to_string(b.index);
    AddDense(out, p + ".in_proj", b.in_proj);
    out.emplace_back(p + ".prelu1", b.prelu1);
    AddNorm(out, p + ".norm1", b.norm1);
    out.emplace_back(p + ".dw_weight", b.dw_weight);
    out.emplace_back(p + ".dw_bias", b.dw_bias);
    out.emplace_back(p + ".prelu2", b.prelu2);
    AddNorm(out, p + ".norm2", b.norm2);
    AddDense(out, p + ".residual", b.residual);
    AddDense(out, p + ".skip", b.skip);
  }
  for (std::size_t i = 0; i < repeat_links.size(); ++i) {
    AddDense(out, "repeat_link" + std::to_string(i), repeat_links[i]);
  }
  out.emplace_back("out_prelu", out_prelu);
  AddDense(out, "output", output);
  return out;
}

std::vector<ag::Tensor> TdcnParams::Parameters() const {
  std::vector<ag::Tensor> out;
  for (auto& [name, t] : Named()) out.push_back(t);
  return out;
}

TdcnParams TdcnInit(const TdcnConfig& c, std::size_t input_dim, std::uint64_t seed) {
  ValidateTdcnConfig(c);
  UNISEP_CHECK(input_dim > 0, ErrorCode::kInvalidArgument, "input_dim must be positive");
  Rng rng(seed);
  TdcnParams p;
  p.input_dim = input_dim;
  p.input_norm = MakeNorm(input_dim);
  p.input_proj = MakeDense(input_dim, c.bottleneck, 1.0, rng);
  std::size_t index = 0;
  for (std::size_t r = 0; r < c.repeats; ++r) {
    for (std::size_t x = 0; x < c.blocks_per_repeat; ++x, ++index) {
      TdcnBlockParams b;
      b.index = index;
      b.dilation = std::size_t{1} << x;
      b.in_proj = MakeDense(c.bottleneck, c.conv_channels, 1.0, rng);
      b.prelu1 = FilledParam({1}, 0.25);
      b.norm1 = MakeNorm(c.conv_channels);
      b.dw_weight = UniformParam({c.conv_channels, c.kernel}, c.kernel, rng);
      b.dw_bias = FilledParam({c.conv_channels}, 0.0);
      b.prelu2 = FilledParam({1}, 0.25);
      b.norm2 = MakeNorm(c.conv_channels);
      b.residual = MakeDense(c.conv_channels, c.bottleneck,
                             std::pow(kResidualScaleDecay, static_cast<double>(index)), rng);
      b.skip = MakeDense(c.conv_channels, c.skip_channels, 1.0, rng);
      p.blocks.push_back(std::move(b));
    }
  }
  for (std::size_t dst = 1; dst < c.repeats; ++dst) {
    for (std::size_t src = 0; src < dst; ++src) {
      p.repeat_links.push_back(MakeDense(c.bottleneck, c.bottleneck, 1.0, rng));
    }
  }
  p.out_prelu = FilledParam({1}, 0.25);
  p.output = MakeDense(c.skip_channels, c.sources * c.feature_dim(), 1.0, rng);
  return p;
}

std::vector<ag::Tensor> TdcnForward(const TdcnParams& p, const TdcnConfig& c,
                                    const ag::Tensor& features) {
  UNISEP_CHECK(features.rank() == 2 && features.dim(0) == p.input_dim &&
                   features.dim(1) >= 1,
               ErrorCode::kShapeMismatch,
               "tdcn: expected features [" + std::to_string(p.input_dim) + " x T], got " +
                   ag::ShapeString(features.shape()));
  ag::Tensor h = features;
  if (c.feature_norm) h = ag::FeatureNorm(h, p.input_norm.gamma, p.input_norm.beta);
  h = ApplyDense(p.input_proj, h);

  std::vector<ag::Tensor> repeat_inputs;
  ag::Tensor skip_sum;
  std::size_t link = 0;
  for (std::size_t r = 0; r < c.repeats; ++r) {
    for (std::size_t src = 0; src < r; ++src, ++link) {
      h = ag::Add(h, ApplyDense(p.repeat_links[link], repeat_inputs[src]));
    }
    repeat_inputs.push_back(h);
    for (std::size_t x = 0; x < c.blocks_per_repeat; ++x) {
      const TdcnBlockParams& b = p.blocks[r * c.blocks_per_repeat + x];
      ag::Tensor y = ag::Prelu(ApplyDense(b.in_proj, h), b.prelu1);
      if (c.feature_norm) y = ag::FeatureNorm(y, b.norm1.gamma, b.norm1.beta);
      y = ag::AddRowBias(ag::DepthwiseConv1d(y, b.dw_weight, b.dilation), b.dw_bias);
      y = ag::Prelu(y, b.prelu2);
      if (c.feature_norm) y = ag::FeatureNorm(y, b.norm2.gamma, b.norm2.beta);
      h = ag::Add(h, ApplyDense(b.residual, y));
      ag::Tensor s = ApplyDense(b.skip, y);
      skip_sum = skip_sum.defined() ? ag::Add(skip_sum, s) : s;
    }
  }
  ag::Tensor logits = ApplyDense(p.output, ag::Prelu(skip_sum, p.out_prelu));
  ag::Tensor all = ag::Sigmoid(logits);
  const std::size_t n = c.feature_dim();
  std::vector<ag::Tensor> masks;
  for (std::size_t k = 0; k < c.sources; ++k) {
    masks.push_back(ag::Slice(all, 0, k * n, (k + 1) * n));
  }
  return masks;
}

}  // namespace unisep
