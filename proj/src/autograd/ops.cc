// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/autograd/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "unisep/error.h"

namespace unisep::ag {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMatrix>;
using MapCM = Eigen::Map<const RowMatrix>;

// Gradient buffer of input i, or nullptr when it does not need one.
double* InGrad(const Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? in.GradBuffer() : nullptr;
}

[[noreturn]] void ShapeError(const std::string& op, const std::vector<Tensor>& ins,
                             const std::string& detail = "") {
  std::string msg = op + ": incompatible shapes";
  for (const auto& t : ins) msg += " " + ShapeString(t.shape());
  if (!detail.empty()) msg += " (" + detail + ")";
  throw Error(ErrorCode::kShapeMismatch, msg);
}

void CheckSameShape(const std::string& op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError(op, {a, b});
}

void CheckRank(const std::string& op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) ShapeError(op, {t}, "expected rank " + std::to_string(rank));
}

void CheckScalar(const std::string& op, const Tensor& t) {
  if (t.size() != 1) ShapeError(op, {t}, "expected a single-element tensor");
}

struct AxisSplit {
  std::size_t outer, dim, inner;
};

AxisSplit SplitAt(const Shape& shape, std::size_t axis) {
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckRank("matmul", a, 2);
  CheckRank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) ShapeError("matmul", {a, b});
  std::vector<double> out(m * n);
  MapM(out.data(), m, n).noalias() =
      MapCM(a.value().data(), m, k) * MapCM(b.value().data(), k, n);
  return MakeOp("matmul", {m, n}, std::move(out), {a, b},
                [m, k, n](const Node& self) {
                  MapCM g(self.grad.data(), m, n);
                  const auto& av = self.inputs[0]->value;
                  const auto& bv = self.inputs[1]->value;
                  if (double* ga = InGrad(self, 0)) {
                    MapM(ga, m, k).noalias() += g * MapCM(bv.data(), k, n).transpose();
                  }
                  if (double* gb = InGrad(self, 1)) {
                    MapM(gb, k, n).noalias() += MapCM(av.data(), m, k).transpose() * g;
                  }
                });
}

Tensor AddRowBias(const Tensor& x, const Tensor& bias) {
  CheckRank("add_row_bias", x, 2);
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (bias.size() != m) ShapeError("add_row_bias", {x, bias});
  std::vector<double> out = x.value();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.value()[i];
  }
  return MakeOp("add_row_bias", x.shape(), std::move(out), {x, bias},
                [m, n](const Node& self) {
                  const double* g = self.grad.data();
                  if (double* gx = InGrad(self, 0)) {
                    for (std::size_t i = 0; i < m * n; ++i) gx[i] += g[i];
                  }
                  if (double* gb = InGrad(self, 1)) {
                    for (std::size_t i = 0; i < m; ++i) {
                      double s = 0.0;
                      for (std::size_t j = 0; j < n; ++j) s += g[i * n + j];
                      gb[i] += s;
                    }
                  }
                });
}

Tensor Conv1d(const Tensor& x, const Tensor& w, std::size_t stride,
              std::size_t dilation) {
  CheckRank("conv1d", x, 2);
  CheckRank("conv1d", w, 3);
  const std::size_t cin = x.dim(0), len = x.dim(1);
  const std::size_t cout = w.dim(0), taps = w.dim(2);
  if (w.dim(1) != cin || stride == 0 || dilation == 0) ShapeError("conv1d", {x, w});
  const std::size_t span = dilation * (taps - 1) + 1;
  if (len < span) ShapeError("conv1d", {x, w}, "input shorter than the kernel span");
  const std::size_t lout = (len - span) / stride + 1;
  std::vector<double> out(cout * lout, 0.0);
  const double* xv = x.value().data();
  const double* wv = w.value().data();
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t c = 0; c < cin; ++c) {
      const double* wr = wv + (o * cin + c) * taps;
      const double* xr = xv + c * len;
      for (std::size_t t = 0; t < lout; ++t) {
        const double* xs = xr + t * stride;
        double acc = 0.0;
        for (std::size_t p = 0; p < taps; ++p) acc += wr[p] * xs[p * dilation];
        out[o * lout + t] += acc;
      }
    }
  }
  return MakeOp("conv1d", {cout, lout}, std::move(out), {x, w},
                [=](const Node& self) {
                  const double* g = self.grad.data();
                  const double* xv = self.inputs[0]->value.data();
                  const double* wv = self.inputs[1]->value.data();
                  double* gx = InGrad(self, 0);
                  double* gw = InGrad(self, 1);
                  for (std::size_t o = 0; o < cout; ++o) {
                    for (std::size_t c = 0; c < cin; ++c) {
                      const double* wr = wv + (o * cin + c) * taps;
                      const double* xr = xv + c * len;
                      for (std::size_t t = 0; t < lout; ++t) {
                        const double go = g[o * lout + t];
                        if (go == 0.0) continue;
                        const std::size_t base = t * stride;
                        for (std::size_t p = 0; p < taps; ++p) {
                          const std::size_t at = base + p * dilation;
                          if (gx) gx[c * len + at] += wr[p] * go;
                          if (gw) gw[(o * cin + c) * taps + p] += xr[at] * go;
                        }
                      }
                    }
                  }
                });
}

Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, std::size_t dilation) {
  CheckRank("depthwise_conv1d", x, 2);
  CheckRank("depthwise_conv1d", w, 2);
  const std::size_t ch = x.dim(0), frames = x.dim(1), taps = w.dim(1);
  if (w.dim(0) != ch || taps % 2 == 0 || dilation == 0) {
    ShapeError("depthwise_conv1d", {x, w}, "needs C matching and odd taps");
  }
  const auto half = static_cast<std::ptrdiff_t>((taps - 1) / 2);
  const auto d = static_cast<std::ptrdiff_t>(dilation);
  const auto tl = static_cast<std::ptrdiff_t>(frames);
  std::vector<double> out(ch * frames, 0.0);
  const double* xv = x.value().data();
  const double* wv = w.value().data();
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t p = 0; p < taps; ++p) {
      const double wp = wv[c * taps + p];
      const std::ptrdiff_t shift = (static_cast<std::ptrdiff_t>(p) - half) * d;
      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(tl, tl - shift);
      for (std::ptrdiff_t t = t0; t < t1; ++t) {
        out[c * frames + t] += wp * xv[c * frames + t + shift];
      }
    }
  }
  return MakeOp("depthwise_conv1d", {ch, frames}, std::move(out), {x, w},
                [=](const Node& self) {
                  const double* g = self.grad.data();
                  const double* xv = self.inputs[0]->value.data();
                  const double* wv = self.inputs[1]->value.data();
                  double* gx = InGrad(self, 0);
                  double* gw = InGrad(self, 1);
                  for (std::size_t c = 0; c < ch; ++c) {
                    for (std::size_t p = 0; p < taps; ++p) {
                      const std::ptrdiff_t shift = (static_cast<std::ptrdiff_t>(p) - half) * d;
                      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
                      const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(tl, tl - shift);
                      double acc = 0.0;
                      for (std::ptrdiff_t t = t0; t < t1; ++t) {
                        const double go = g[c * frames + t];
                        if (gx) gx[c * frames + t + shift] += wv[c * taps + p] * go;
                        acc += xv[c * frames + t + shift] * go;
                      }
                      if (gw) gw[c * taps + p] += acc;
                    }
                  }
                });
}

Tensor TransposedConv1d(const Tensor& x, const Tensor& w, std::size_t stride) {
  CheckRank("transposed_conv1d", x, 2);
  CheckRank("transposed_conv1d", w, 3);
  const std::size_t cin = x.dim(0), frames = x.dim(1);
  const std::size_t cout = w.dim(1), taps = w.dim(2);
  if (w.dim(0) != cin || stride == 0 || frames == 0) ShapeError("transposed_conv1d", {x, w});
  const std::size_t lout = (frames - 1) * stride + taps;
  std::vector<double> out(cout * lout, 0.0);
  const double* xv = x.value().data();
  const double* wv = w.value().data();
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t o = 0; o < cout; ++o) {
      const double* wr = wv + (c * cout + o) * taps;
      double* orow = out.data() + o * lout;
      for (std::size_t t = 0; t < frames; ++t) {
        const double xc = xv[c * frames + t];
        if (xc == 0.0) continue;
        double* dst = orow + t * stride;
        for (std::size_t p = 0; p < taps; ++p) dst[p] += wr[p] * xc;
      }
    }
  }
  return MakeOp("transposed_conv1d", {cout, lout}, std::move(out), {x, w},
                [=](const Node& self) {
                  const double* g = self.grad.data();
                  const double* xv = self.inputs[0]->value.data();
                  const double* wv = self.inputs[1]->value.data();
                  double* gx = InGrad(self, 0);
                  double* gw = InGrad(self, 1);
                  for (std::size_t c = 0; c < cin; ++c) {
                    for (std::size_t o = 0; o < cout; ++o) {
                      const double* wr = wv + (c * cout + o) * taps;
                      const double* grow = g + o * lout;
                      for (std::size_t t = 0; t < frames; ++t) {
                        const double* src = grow + t * stride;
                        const double xc = xv[c * frames + t];
                        double acc = 0.0;
                        for (std::size_t p = 0; p < taps; ++p) {
                          acc += wr[p] * src[p];
                          if (gw) gw[(c * cout + o) * taps + p] += xc * src[p];
                        }
                        if (gx) gx[c * frames + t] += acc;
                      }
                    }
                  }
                });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return MakeOp("add", a.shape(), std::move(out), {a, b}, [](const Node& self) {
    const std::size_t n = self.grad.size();
    for (std::size_t k = 0; k < 2; ++k) {
      if (double* gi = InGrad(self, k)) {
        for (std::size_t i = 0; i < n; ++i) gi[i] += self.grad[i];
      }
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSameShape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return MakeOp("sub", a.shape(), std::move(out), {a, b}, [](const Node& self) {
    const std::size_t n = self.grad.size();
    if (double* ga = InGrad(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i];
    }
    if (double* gb = InGrad(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) gb[i] -= self.grad[i];
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSameShape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return MakeOp("mul", a.shape(), std::move(out), {a, b}, [](const Node& self) {
    const std::size_t n = self.grad.size();
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (double* ga = InGrad(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i] * bv[i];
    }
    if (double* gb = InGrad(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) gb[i] += self.grad[i] * av[i];
    }
  });
}

Tensor Scale(const Tensor& x, double c) {
  std::vector<double> out(x.value());
  for (double& v : out) v *= c;
  return MakeOp("scale", x.shape(), std::move(out), {x}, [c](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += c * self.grad[i];
  });
}

Tensor AddConst(const Tensor& x, double c) {
  std::vector<double> out(x.value());
  for (double& v : out) v += c;
  return MakeOp("add_const", x.shape(), std::move(out), {x}, [](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor ScaleByParam(const Tensor& x, const Tensor& s) {
  CheckScalar("scale_by_param", s);
  const double sv = s.value()[0];
  std::vector<double> out(x.value());
  for (double& v : out) v *= sv;
  return MakeOp("scale_by_param", x.shape(), std::move(out), {x, s},
                [](const Node& self) {
                  const double sv = self.inputs[1]->value[0];
                  const auto& xv = self.inputs[0]->value;
                  if (double* gx = InGrad(self, 0)) {
                    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += sv * self.grad[i];
                  }
                  if (double* gs = InGrad(self, 1)) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * self.grad[i];
                    gs[0] += acc;
                  }
                });
}

Tensor Relu(const Tensor& x) {
  KinkRecorder::Record(x.value());
  std::vector<double> out(x.value());
  for (double& v : out) v = std::max(v, 0.0);
  return MakeOp("relu", x.shape(), std::move(out), {x}, [](const Node& self) {
    double* gx = InGrad(self, 0);
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Tensor Prelu(const Tensor& x, const Tensor& slope) {
  CheckScalar("prelu", slope);
  KinkRecorder::Record(x.value());
  const double a = slope.value()[0];
  std::vector<double> out(x.value());
  for (double& v : out) v = v > 0.0 ? v : a * v;
  return MakeOp("prelu", x.shape(), std::move(out), {x, slope}, [](const Node& self) {
    const auto& xv = self.inputs[0]->value;
    const double a = self.inputs[1]->value[0];
    double* gx = InGrad(self, 0);
    double* ga = InGrad(self, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > 0.0) {
        if (gx) gx[i] += self.grad[i];
      } else {
        if (gx) gx[i] += a * self.grad[i];
        acc += xv[i] * self.grad[i];
      }
    }
    if (ga) ga[0] += acc;
  });
}

Tensor Sigmoid(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x.value()[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  std::vector<double> saved = out;
  return MakeOp("sigmoid", x.shape(), std::move(out), {x},
                [saved = std::move(saved)](const Node& self) {
                  double* gx = InGrad(self, 0);
                  for (std::size_t i = 0; i < saved.size(); ++i) {
                    gx[i] += self.grad[i] * saved[i] * (1.0 - saved[i]);
                  }
                });
}

Tensor FeatureNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   double eps) {
  CheckRank("feature_norm", x, 2);
  const std::size_t ch = x.dim(0), frames = x.dim(1);
  if (gamma.size() != ch || beta.size() != ch || frames == 0) {
    ShapeError("feature_norm", {x, gamma, beta});
  }
  std::vector<double> normalized(ch * frames);
  std::vector<double> inv_std(ch);
  std::vector<double> out(ch * frames);
  const double* xv = x.value().data();
  for (std::size_t c = 0; c < ch; ++c) {
    const double* row = xv + c * frames;
    double mean = 0.0;
    for (std::size_t t = 0; t < frames; ++t) mean += row[t];
    mean /= static_cast<double>(frames);
    double var = 0.0;
    for (std::size_t t = 0; t < frames; ++t) var += (row[t] - mean) * (row[t] - mean);
    var /= static_cast<double>(frames);
    inv_std[c] = 1.0 / std::sqrt(var + eps);
    for (std::size_t t = 0; t < frames; ++t) {
      const double z = (row[t] - mean) * inv_std[c];
      normalized[c * frames + t] = z;
      out[c * frames + t] = gamma.value()[c] * z + beta.value()[c];
    }
  }
  return MakeOp("feature_norm", x.shape(), std::move(out), {x, gamma, beta},
                [ch, frames, normalized = std::move(normalized),
                 inv_std = std::move(inv_std)](const Node& self) {
                  const double* g = self.grad.data();
                  const auto& gam = self.inputs[1]->value;
                  double* gx = InGrad(self, 0);
                  double* gg = InGrad(self, 1);
                  double* gb = InGrad(self, 2);
                  const double inv_t = 1.0 / static_cast<double>(frames);
                  for (std::size_t c = 0; c < ch; ++c) {
                    const double* gr = g + c * frames;
                    const double* zr = normalized.data() + c * frames;
                    double sum_g = 0.0, sum_gz = 0.0;
                    for (std::size_t t = 0; t < frames; ++t) {
                      sum_g += gr[t];
                      sum_gz += gr[t] * zr[t];
                    }
                    if (gg) gg[c] += sum_gz;
                    if (gb) gb[c] += sum_g;
                    if (gx) {
                      const double k = gam[c] * inv_std[c];
                      for (std::size_t t = 0; t < frames; ++t) {
                        gx[c * frames + t] +=
                            k * (gr[t] - sum_g * inv_t - zr[t] * sum_gz * inv_t);
                      }
                    }
                  }
                });
}

Tensor ReduceSum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value()) s += v;
  return MakeOp("reduce_sum", {1}, {s}, {x}, [](const Node& self) {
    double* gx = InGrad(self, 0);
    const double g = self.grad[0];
    for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) gx[i] += g;
  });
}

Tensor Log10(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    UNISEP_CHECK(x.value()[i] > 0.0, ErrorCode::kInvalidArgument,
                 "log10: non-positive input");
    out[i] = std::log10(x.value()[i]);
  }
  return MakeOp("log10", x.shape(), std::move(out), {x}, [](const Node& self) {
    double* gx = InGrad(self, 0);
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      gx[i] += self.grad[i] / (xv[i] * std::numbers::ln10);
    }
  });
}

Tensor Concat(const std::vector<Tensor>& parts, std::size_t axis) {
  UNISEP_CHECK(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) ShapeError("concat", parts, "axis out of range");
  Shape out_shape = ref;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != ref.size()) ShapeError("concat", parts);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (i != axis && p.dim(i) != ref[i]) ShapeError("concat", parts);
    }
    out_shape[axis] += p.dim(axis);
  }
  const AxisSplit os = SplitAt(out_shape, axis);
  std::vector<double> out(NumElements(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const AxisSplit ps = SplitAt(p.shape(), axis);
    for (std::size_t o = 0; o < ps.outer; ++o) {
      std::copy_n(p.value().data() + o * ps.dim * ps.inner, ps.dim * ps.inner,
                  out.data() + (o * os.dim + offset) * os.inner);
    }
    offset += ps.dim;
  }
  return MakeOp("concat", out_shape, std::move(out), parts,
                [axis, os, offsets](const Node& self) {
                  for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                    double* gp = InGrad(self, k);
                    if (!gp) continue;
                    const AxisSplit ps = SplitAt(self.inputs[k]->shape, axis);
                    for (std::size_t o = 0; o < ps.outer; ++o) {
                      const double* src = self.grad.data() + (o * os.dim + offsets[k]) * os.inner;
                      double* dst = gp + o * ps.dim * ps.inner;
                      for (std::size_t i = 0; i < ps.dim * ps.inner; ++i) dst[i] += src[i];
                    }
                  }
                });
}

Tensor Slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= x.rank() || begin > end || end > x.dim(axis)) {
    ShapeError("slice", {x}, "range [" + std::to_string(begin) + ", " +
                                 std::to_string(end) + ") on axis " + std::to_string(axis));
  }
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const std::size_t width = (end - begin) * s.inner;
  std::vector<double> out(s.outer * width);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(x.value().data() + (o * s.dim + begin) * s.inner, width,
                out.data() + o * width);
  }
  return MakeOp("slice", out_shape, std::move(out), {x}, [s, begin, width](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = gx + (o * s.dim + begin) * s.inner;
      const double* src = self.grad.data() + o * width;
      for (std::size_t i = 0; i < width; ++i) dst[i] += src[i];
    }
  });
}

Tensor Pad(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after) {
  if (axis >= x.rank()) ShapeError("pad", {x}, "axis out of range");
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] += before + after;
  const std::size_t out_dim = out_shape[axis];
  std::vector<double> out(NumElements(out_shape), 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(x.value().data() + o * s.dim * s.inner, s.dim * s.inner,
                out.data() + (o * out_dim + before) * s.inner);
  }
  return MakeOp("pad", out_shape, std::move(out), {x}, [s, before, out_dim](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* src = self.grad.data() + (o * out_dim + before) * s.inner;
      double* dst = gx + o * s.dim * s.inner;
      for (std::size_t i = 0; i < s.dim * s.inner; ++i) dst[i] += src[i];
    }
  });
}

Tensor Transpose(const Tensor& x) {
  CheckRank("transpose", x, 2);
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x.value()[i * n + j];
  }
  return MakeOp("transpose", {n, m}, std::move(out), {x}, [m, n](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += self.grad[j * m + i];
    }
  });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.size()) ShapeError("reshape", {x}, "to " + ShapeString(shape));
  return MakeOp("reshape", std::move(shape), x.value(), {x}, [](const Node& self) {
    double* gx = InGrad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor OverlapAdd(const Tensor& frames, std::size_t hop) {
  CheckRank("overlap_add", frames, 2);
  const std::size_t count = frames.dim(0), width = frames.dim(1);
  if (count == 0 || hop == 0) ShapeError("overlap_add", {frames});
  const std::size_t len = (count - 1) * hop + width;
  std::vector<double> out(len, 0.0);
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t i = 0; i < width; ++i) out[t * hop + i] += frames.value()[t * width + i];
  }
  return MakeOp("overlap_add", {len}, std::move(out), {frames},
                [count, width, hop](const Node& self) {
                  double* gf = InGrad(self, 0);
                  for (std::size_t t = 0; t < count; ++t) {
                    for (std::size_t i = 0; i < width; ++i) {
                      gf[t * width + i] += self.grad[t * hop + i];
                    }
                  }
                });
}

Tensor Frame(const Tensor& signal, std::size_t window, std::size_t hop) {
  CheckRank("frame", signal, 1);
  const std::size_t len = signal.dim(0);
  if (window == 0 || hop == 0 || len < window) ShapeError("frame", {signal});
  const std::size_t count = (len - window) / hop + 1;
  std::vector<double> out(count * window);
  for (std::size_t t = 0; t < count; ++t) {
    std::copy_n(signal.value().data() + t * hop, window, out.data() + t * window);
  }
  return MakeOp("frame", {count, window}, std::move(out), {signal},
                [count, window, hop](const Node& self) {
                  double* gs = InGrad(self, 0);
                  for (std::size_t t = 0; t < count; ++t) {
                    for (std::size_t i = 0; i < window; ++i) {
                      gs[t * hop + i] += self.grad[t * window + i];
                    }
                  }
                });
}

}  // namespace unisep::ag
