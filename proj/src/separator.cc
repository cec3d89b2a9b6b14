// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/separator.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "unisep/autograd/checkpoint.h"
#include "unisep/autograd/ops.h"
#include "unisep/error.h"
#include "unisep/fft.h"

namespace unisep {

namespace {

ag::Tensor WaveTensor(const Waveform& w) {
  return ag::Tensor::Constant({w.size()}, w.samples);
}

Waveform ToWaveform(const ag::Tensor& t, int rate) { return Waveform(t.value(), rate); }

void CheckSignal(const ag::Tensor& x) {
  UNISEP_CHECK(x.rank() == 1 && x.size() > 0, ErrorCode::kShapeMismatch,
               "expected a non-empty waveform tensor [L], got " + ag::ShapeString(x.shape()));
}
}  // namespace

// ---- Model ------------------------------------------------------------------

std::vector<std::pair<std::string, ag::Tensor>> SeparationModel::Named() const {
  std::vector<std::pair<std::string, ag::Tensor>> out;
  if (analysis.defined()) out.emplace_back("analysis", analysis);
  if (synthesis.defined()) out.emplace_back("synthesis", synthesis);
  for (auto& [name, t] : stage1.Named()) out.emplace_back("stage1." + name, t);
  if (stage2)
    for (auto& [name, t] : stage2->Named()) out.emplace_back("stage2." + name, t);
  return out;
}

std::vector<ag::Tensor> SeparationModel::Parameters() const {
  std::vector<ag::Tensor> out;
  for (auto& [name, t] : Named()) out.push_back(t);
  return out;
}

SeparationModel InitModel(const TdcnConfig& config, bool iterative, std::uint64_t seed) {
  ValidateTdcnConfig(config);
  SeparationModel m;
  m.config = config;
  m.iterative = iterative;
  const std::size_t n = config.feature_dim();
  if (config.basis_kind == BasisKind::kLearned) {
    LearnedBasis basis = InitLearnedBasis(config.n_basis, config.frame_spec,
                                          Rng::Derive(seed, 0).NextU64());
    const std::size_t w = config.frame_spec.window_len;
    m.analysis = ag::Tensor::Parameter({n, 1, w}, basis.analysis);
    m.synthesis = ag::Tensor::Parameter({n, 1, w}, basis.synthesis);
  }
  m.stage1 = TdcnInit(config, n, Rng::Derive(seed, 1).NextU64());
  if (iterative) m.stage2 = TdcnInit(config, (config.sources + 1) * n, Rng::Derive(seed, 2).NextU64());
  return m;
}

// ---- Differentiable basis layers -------------------------------------------

ag::Tensor StftLogMagnitude(const ag::Tensor& waveform, const FrameSpec& spec) {
  CheckSignal(waveform);
  ValidateFrameSpec(spec);
  const std::size_t len = waveform.size();
  CoeffFrames x = Stft(Waveform(waveform.value(), spec.sample_rate_hz), spec);
  const std::size_t frames = x.frames, bins = x.n_bins;
  std::vector<double> out(bins * frames);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t k = 0; k < bins; ++k)
      out[k * frames + t] = std::log(std::abs(x.at(t, k)) + kLogMagnitudeOffset);
  return ag::MakeOp(
      "stft_log_magnitude", {bins, frames}, std::move(out), {waveform},
      [x = std::move(x), len](const ag::Node& self) {
        CoeffFrames g = x;
        for (std::size_t t = 0; t < x.frames; ++t) {
          for (std::size_t k = 0; k < x.n_bins; ++k) {
            const std::complex<double> v = x.at(t, k);
            const double mag = std::abs(v);
            const double up = self.grad[k * x.frames + t];
            g.at(t, k) = mag > 0.0 ? v * (up / (mag * (mag + kLogMagnitudeOffset)))
                                   : std::complex<double>(0.0, 0.0);
          }
        }
        const std::vector<double> dx = StftAdjoint(g, len);
        double* gi = self.inputs[0]->GradBuffer();
        for (std::size_t i = 0; i < len; ++i) gi[i] += dx[i];
      });
}

ag::Tensor MaskedIstft(const ag::Tensor& mask, const std::vector<std::complex<double>>& coeffs,
                       const FrameSpec& spec, std::size_t target_len) {
  ValidateFrameSpec(spec);
  const std::size_t bins = spec.NumBins();
  UNISEP_CHECK(mask.rank() == 2 && mask.dim(0) == bins, ErrorCode::kShapeMismatch,
               "mask must be [" + std::to_string(bins) + " x T], got " +
                   ag::ShapeString(mask.shape()));
  const std::size_t frames = mask.dim(1);
  UNISEP_CHECK(coeffs.size() == frames * bins, ErrorCode::kShapeMismatch,
               "coefficients do not match the mask shape");
  CoeffFrames y;
  y.kind = CoeffKind::kComplexStft;
  y.spec = spec;
  y.frames = frames;
  y.n_bins = bins;
  y.original_len = target_len;
  y.data.resize(coeffs.size());
  const auto& m = mask.value();
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t k = 0; k < bins; ++k)
      y.data[t * bins + k] = coeffs[t * bins + k] * m[k * frames + t];
  Waveform out = Istft(y, target_len);

  return ag::MakeOp(
      "masked_istft", {target_len}, std::move(out.samples), {mask},
      [coeffs, spec, frames, bins, target_len](const ag::Node& self) {
        const std::vector<double> window = SqrtHannWindow(spec.window_len);
        const std::size_t padded = spec.PaddedLength(frames);
        const std::size_t pre = spec.PrePad();
        std::vector<double> norm(padded, 0.0);
        for (std::size_t t = 0; t < frames; ++t)
          for (std::size_t i = 0; i < spec.window_len; ++i)
            norm[t * spec.hop + i] += window[i] * window[i];
        std::vector<double> h(padded, 0.0);
        for (std::size_t i = 0; i < target_len; ++i) {
          const double d = norm[pre + i];
          if (d > 1e-10) h[pre + i] = self.grad[i] / d;
        }
        double* gm = self.inputs[0]->GradBuffer();
        const double inv_f = 1.0 / static_cast<double>(spec.fft_len);
        std::vector<double> u(spec.window_len);
        for (std::size_t t = 0; t < frames; ++t) {
          for (std::size_t i = 0; i < spec.window_len; ++i) u[i] = window[i] * h[t * spec.hop + i];
          const auto ru = RealFft(u, spec.fft_len);
          for (std::size_t k = 0; k < bins; ++k) {
            const double c = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
            gm[k * frames + t] += c * inv_f * std::real(coeffs[t * bins + k] * std::conj(ru[k]));
          }
        }
      });
}

ag::Tensor LearnedEncode(const ag::Tensor& waveform, const ag::Tensor& analysis,
                         const FrameSpec& spec) {
  CheckSignal(waveform);
  ValidateFrameSpec(spec);
  UNISEP_CHECK(analysis.rank() == 3 && analysis.dim(1) == 1 &&
                   analysis.dim(2) == spec.window_len,
               ErrorCode::kShapeMismatch,
               "analysis basis must be [N x 1 x W], got " + ag::ShapeString(analysis.shape()));
  const std::size_t len = waveform.size();
  const std::size_t frames = spec.FrameCount(len);
  const std::size_t padded = spec.PaddedLength(frames);
  ag::Tensor x = ag::Pad(waveform, 0, spec.PrePad(), padded - spec.PrePad() - len);
  x = ag::Reshape(x, {1, padded});
  return ag::Relu(ag::Conv1d(x, analysis, spec.hop, 1));
}

ag::Tensor LearnedDecode(const ag::Tensor& coeffs, const ag::Tensor& synthesis,
                         const FrameSpec& spec, std::size_t target_len) {
  UNISEP_CHECK(synthesis.rank() == 3 && synthesis.dim(1) == 1 &&
                   synthesis.dim(2) == spec.window_len,
               ErrorCode::kShapeMismatch,
               "synthesis basis must be [N x 1 x W], got " + ag::ShapeString(synthesis.shape()));
  UNISEP_CHECK(coeffs.rank() == 2 && coeffs.dim(0) == synthesis.dim(0),
               ErrorCode::kShapeMismatch, "coefficients do not match the synthesis basis");
  const std::size_t padded = spec.PaddedLength(coeffs.dim(1));
  UNISEP_CHECK(spec.PrePad() + target_len <= padded, ErrorCode::kShapeMismatch,
               "target length exceeds the framed length");
  ag::Tensor y = ag::TransposedConv1d(coeffs, synthesis, spec.hop);
  y = ag::Reshape(y, {padded});
  return ag::Slice(y, 0, spec.PrePad(), spec.PrePad() + target_len);
}

std::vector<ag::Tensor> MixtureConsistency(const std::vector<ag::Tensor>& estimates,
                                           const ag::Tensor& mixture) {
  UNISEP_CHECK(!estimates.empty(), ErrorCode::kInvalidArgument, "no estimates");
  ag::Tensor residual = mixture;
  for (const auto& e : estimates) residual = ag::Sub(residual, e);
  ag::Tensor share = ag::Scale(residual, 1.0 / static_cast<double>(estimates.size()));
  std::vector<ag::Tensor> out;
  for (const auto& e : estimates) out.push_back(ag::Add(e, share));
  return out;
}

// ---- Forward passes -------------------------------------------------------

namespace {

ag::Tensor Features(const SeparationModel& m, const ag::Tensor& wave) {
  if (m.config.basis_kind == BasisKind::kStft)
    return StftLogMagnitude(wave, m.config.frame_spec);
  return LearnedEncode(wave, m.analysis, m.config.frame_spec);
}

}  // namespace

std::vector<StageOutput> ForwardModel(const SeparationModel& model, const Waveform& mixture) {
  ValidateWaveform(mixture);
  UNISEP_CHECK(!mixture.empty(), ErrorCode::kEmptyAudio, "empty mixture");
  const TdcnConfig& c = model.config;
  UNISEP_CHECK(mixture.sample_rate_hz == c.frame_spec.sample_rate_hz, ErrorCode::kInvalidArgument,
               "mixture sample rate " + std::to_string(mixture.sample_rate_hz) +
                   " does not match the model's " + std::to_string(c.frame_spec.sample_rate_hz));
  const std::size_t len = mixture.size();
  const bool stft = c.basis_kind == BasisKind::kStft;
  ag::Tensor mix = WaveTensor(mixture);

  CoeffFrames mix_stft;
  ag::Tensor mix_coeffs;  // learned basis only
  ag::Tensor features;
  if (stft) {
    mix_stft = Stft(mixture, c.frame_spec);
    features = StftLogMagnitude(mix, c.frame_spec);
  } else {
    mix_coeffs = LearnedEncode(mix, model.analysis, c.frame_spec);
    features = mix_coeffs;
  }

  auto run_stage = [&](const TdcnParams& params, const ag::Tensor& input) {
    StageOutput out;
    out.masks = TdcnForward(params, c, input);
    std::vector<ag::Tensor> raw;
    for (const auto& mask : out.masks) {
      if (stft) {
        raw.push_back(MaskedIstft(mask, mix_stft.data, c.frame_spec, len));
      } else {
        raw.push_back(LearnedDecode(ag::Mul(mask, mix_coeffs), model.synthesis, c.frame_spec, len));
      }
    }
    out.estimates = MixtureConsistency(raw, mix);
    return out;
  };

  std::vector<StageOutput> stages;
  stages.push_back(run_stage(model.stage1, features));
  if (model.iterative) {
    UNISEP_CHECK(model.stage2.has_value(), ErrorCode::kInvalidArgument,
                 "iterative model has no second stage");
    std::vector<ag::Tensor> parts = {features};
    for (const auto& e : stages[0].estimates) parts.push_back(Features(model, e));
    stages.push_back(run_stage(*model.stage2, ag::Concat(parts, 0)));
  }
  return stages;
}

std::vector<Waveform> Separate(const SeparationModel& model, const Waveform& mixture) {
  auto stages = ForwardModel(model, mixture);
  std::vector<Waveform> out;
  for (const auto& e : stages.back().estimates) out.push_back(ToWaveform(e, mixture.sample_rate_hz));
  return out;
}

std::vector<std::vector<Waveform>> ItdcnForward(const SeparationModel& model,
                                                const Waveform& mixture) {
  UNISEP_CHECK(model.iterative, ErrorCode::kInvalidArgument, "model is not iterative");
  std::vector<std::vector<Waveform>> out;
  for (const auto& stage : ForwardModel(model, mixture)) {
    std::vector<Waveform> ests;
    for (const auto& e : stage.estimates) ests.push_back(ToWaveform(e, mixture.sample_rate_hz));
    out.push_back(std::move(ests));
  }
  return out;
}

// ---- Loss and training ----------------------------------------------------

ag::Tensor NegSnrLossTensor(const Waveform& reference, const ag::Tensor& estimate, double tau) {
  UNISEP_CHECK(estimate.rank() == 1 && estimate.size() == reference.size(),
               ErrorCode::kShapeMismatch, "estimate and reference lengths differ");
  UNISEP_CHECK(tau >= 0.0, ErrorCode::kInvalidArgument, "tau must be non-negative");
  double signal = 0.0;
  for (double v : reference.samples) signal += v * v;
  UNISEP_CHECK(signal > 0.0, ErrorCode::kInvalidArgument, "zero-energy reference");
  ag::Tensor diff = ag::Sub(estimate, WaveTensor(reference));
  ag::Tensor err = ag::AddConst(ag::ReduceSum(ag::Mul(diff, diff)), tau * signal);
  return ag::AddConst(ag::Scale(ag::Log10(err), 10.0), -10.0 * std::log10(signal));
}

PitTensorLoss PitNegSnr(const std::vector<Waveform>& references,
                        const std::vector<ag::Tensor>& estimates, double tau) {
  const std::size_t k = references.size();
  UNISEP_CHECK(k >= 1 && k <= kMaxPitSources, ErrorCode::kInvalidArgument,
               "PIT supports 1 to " + std::to_string(kMaxPitSources) + " sources");
  UNISEP_CHECK(estimates.size() == k, ErrorCode::kShapeMismatch,
               "estimate count differs from reference count");
  std::vector<ag::Tensor> pair(k * k);
  PitTensorLoss out;
  out.per_pair_losses.resize(k * k);
  for (std::size_t e = 0; e < k; ++e) {
    for (std::size_t r = 0; r < k; ++r) {
      pair[e * k + r] = NegSnrLossTensor(references[r], estimates[e], tau);
      out.per_pair_losses[e * k + r] = pair[e * k + r].item();
    }
  }
  out.permutation = BestPermutation(out.per_pair_losses, k);
  ag::Tensor total;
  for (std::size_t e = 0; e < k; ++e) {
    const ag::Tensor& term = pair[e * k + out.permutation[e]];
    total = total.defined() ? ag::Add(total, term) : term;
  }
  out.loss = ag::Scale(total, 1.0 / static_cast<double>(k));
  return out;
}

PitTensorLoss ModelLoss(const SeparationModel& model, const MixtureExample& example, double tau) {
  UNISEP_CHECK(example.references.size() == model.config.sources, ErrorCode::kShapeMismatch,
               "example has " + std::to_string(example.references.size()) +
                   " references, model separates " + std::to_string(model.config.sources));
  auto stages = ForwardModel(model, example.mixture);
  PitTensorLoss out;
  ag::Tensor total;
  for (const auto& stage : stages) {
    PitTensorLoss s = PitNegSnr(example.references, stage.estimates, tau);
    total = total.defined() ? ag::Add(total, s.loss) : s.loss;
    out.permutation = s.permutation;
    out.per_pair_losses = s.per_pair_losses;
  }
  out.loss = ag::Scale(total, 1.0 / static_cast<double>(stages.size()));
  return out;
}

namespace {

// Random crop in which every reference carries some energy; falls back to
// the last draw after a bounded number of attempts.
MixtureExample Crop(const MixtureExample& ex, std::size_t crop, Rng& rng) {
  const std::size_t len = ex.mixture.size();
  if (crop == 0 || crop >= len) return ex;
  MixtureExample out;
  for (int attempt = 0; attempt < 16; ++attempt) {
    const std::size_t start = rng.UniformInt(len - crop + 1);
    out.id = ex.id;
    out.references.clear();
    bool ok = true;
    for (const auto& r : ex.references) {
      std::vector<double> s(r.samples.begin() + static_cast<std::ptrdiff_t>(start),
                            r.samples.begin() + static_cast<std::ptrdiff_t>(start + crop));
      double energy = 0.0;
      for (double v : s) energy += v * v;
      if (energy < 1e-6 * static_cast<double>(crop)) ok = false;
      out.references.emplace_back(std::move(s), r.sample_rate_hz);
    }
    out.mixture = Waveform(std::vector<double>(ex.mixture.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                               ex.mixture.samples.begin() + static_cast<std::ptrdiff_t>(start + crop)),
                           ex.mixture.sample_rate_hz);
    if (ok) break;
  }
  return out;
}

bool HasEnergy(const MixtureExample& ex) {
  for (const auto& r : ex.references) {
    double e = 0.0;
    for (double v : r.samples) e += v * v;
    if (!(e > 0.0)) return false;
  }
  return true;
}

}  // namespace

void TrainModel(SeparationModel& model, const std::vector<MixtureExample>& examples,
                const TrainOptions& options, std::vector<TrainLogRow>* log,
                const TrainCallback& on_step) {
  UNISEP_CHECK(!examples.empty(), ErrorCode::kInvalidArgument, "no training examples");
  UNISEP_CHECK(options.batch_size >= 1, ErrorCode::kInvalidArgument, "batch size must be >= 1");
  UNISEP_CHECK(options.crop_s >= 0.0, ErrorCode::kInvalidArgument, "crop length must be >= 0");
  const int rate = model.config.frame_spec.sample_rate_hz;
  const auto crop = static_cast<std::size_t>(std::lround(options.crop_s * rate));
  std::vector<ag::Tensor> params = model.Parameters();
  ag::AdamState adam = ag::InitAdam(params, options.adam);
  Rng rng(options.seed);
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t step = 1; step <= options.steps; ++step) {
    ag::ZeroGrad(params);
    TrainLogRow row;
    row.step = step;
    ag::Tensor total;
    for (std::size_t b = 0; b < options.batch_size; ++b) {
      const MixtureExample& ex = examples[rng.UniformInt(examples.size())];
      MixtureExample item = Crop(ex, crop, rng);
      if (!HasEnergy(item)) item = ex;
      PitTensorLoss l = ModelLoss(model, item, options.tau);
      row.permutations.push_back(l.permutation);
      total = total.defined() ? ag::Add(total, l.loss) : l.loss;
    }
    total = ag::Scale(total, 1.0 / static_cast<double>(options.batch_size));
    row.loss = total.item();
    if (!std::isfinite(row.loss))
      throw Error(ErrorCode::kNonFinite, "training loss is not finite at step " + std::to_string(step));
    ag::Backward(total);
    ag::AdamStep(params, adam);
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_step) on_step(row);
    if (log) log->push_back(std::move(row));
  }
}

SeparationModel Train(const TdcnConfig& config, bool iterative,
                      const std::vector<MixtureExample>& examples, const TrainOptions& options,
                      std::vector<TrainLogRow>* log, const TrainCallback& on_step) {
  SeparationModel model = InitModel(config, iterative, options.seed);
  TrainModel(model, examples, options, log, on_step);
  return model;
}

// ---- Persistence ------------------------------------------------------------

std::string EncodeModelConfig(const TdcnConfig& c, bool iterative) {
  boost::property_tree::ptree pt;
  pt.put("model.iterative", iterative ? "true" : "false");
  pt.put("model.basis", BasisKindName(c.basis_kind));
  pt.put("model.window_len", c.frame_spec.window_len);
  pt.put("model.hop", c.frame_spec.hop);
  pt.put("model.fft_len", c.frame_spec.fft_len);
  pt.put("model.sample_rate_hz", c.frame_spec.sample_rate_hz);
  pt.put("model.n_basis", c.n_basis);
  pt.put("model.bottleneck", c.bottleneck);
  pt.put("model.conv_channels", c.conv_channels);
  pt.put("model.skip_channels", c.skip_channels);
  pt.put("model.kernel", c.kernel);
  pt.put("model.blocks_per_repeat", c.blocks_per_repeat);
  pt.put("model.repeats", c.repeats);
  pt.put("model.sources", c.sources);
  pt.put("model.feature_norm", c.feature_norm ? "true" : "false");
  std::ostringstream out;
  boost::property_tree::write_ini(out, pt);
  return out.str();
}

void DecodeModelConfig(const std::string& text, TdcnConfig* config, bool* iterative) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
    TdcnConfig c;
    *iterative = pt.get<bool>("model.iterative");
    c.basis_kind = ParseBasisKind(pt.get<std::string>("model.basis"));
    c.frame_spec.window_len = pt.get<std::size_t>("model.window_len");
    c.frame_spec.hop = pt.get<std::size_t>("model.hop");
    c.frame_spec.fft_len = pt.get<std::size_t>("model.fft_len");
    c.frame_spec.sample_rate_hz = pt.get<int>("model.sample_rate_hz");
    c.n_basis = pt.get<std::size_t>("model.n_basis");
    c.bottleneck = pt.get<std::size_t>("model.bottleneck");
    c.conv_channels = pt.get<std::size_t>("model.conv_channels");
    c.skip_channels = pt.get<std::size_t>("model.skip_channels");
    c.kernel = pt.get<std::size_t>("model.kernel");
    c.blocks_per_repeat = pt.get<std::size_t>("model.blocks_per_repeat");
    c.repeats = pt.get<std::size_t>("model.repeats");
    c.sources = pt.get<std::size_t>("model.sources");
    c.feature_norm = pt.get<bool>("model.feature_norm", true);
    ValidateTdcnConfig(c);
    *config = c;
  } catch (const boost::property_tree::ptree_error& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad model metadata: ") + e.what());
  }
}

void SaveModel(const SeparationModel& model, const std::string& path) {
  ag::Checkpoint ckpt;
  ckpt.metadata = EncodeModelConfig(model.config, model.iterative);
  for (const auto& [name, t] : model.Named()) ckpt.arrays.push_back({name, t.shape(), t.value()});
  ag::SaveCheckpoint(ckpt, path);
}

SeparationModel LoadModel(const std::string& path) {
  ag::Checkpoint ckpt = ag::LoadCheckpoint(path);
  TdcnConfig config;
  bool iterative = false;
  DecodeModelConfig(ckpt.metadata, &config, &iterative);
  SeparationModel model = InitModel(config, iterative, 0);
  for (auto& [name, t] : model.Named()) {
    const ag::NamedArray* a = ckpt.Find(name);
    UNISEP_CHECK(a != nullptr, ErrorCode::kFormatError, "checkpoint lacks array " + name);
    UNISEP_CHECK(a->shape == t.shape(), ErrorCode::kFormatError,
                 "checkpoint array " + name + " has shape " + ag::ShapeString(a->shape) +
                     ", expected " + ag::ShapeString(t.shape()));
    ag::Tensor handle = t;
    handle.mutable_value() = a->values;
  }
  UNISEP_CHECK(ckpt.arrays.size() == model.Named().size(), ErrorCode::kFormatError,
               "checkpoint has unexpected extra arrays");
  return model;
}

}  // namespace unisep
