// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Mask-based separation system: analysis basis -> TDCN++ masks -> masked
// synthesis -> mixture consistency, optionally iterated once (iTDCN++),
// plus the PIT negative-SNR training loop. STFT and learned bases share
// every component except the transform pair.

#ifndef UNISEP_SEPARATOR_H_
#define UNISEP_SEPARATOR_H_

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "unisep/autograd/adam.h"
#include "unisep/autograd/tensor.h"
#include "unisep/datagen.h"
#include "unisep/objectives.h"
#include "unisep/tdcn.h"

namespace unisep {

// Offset inside log(|X| + offset) for STFT network features.
constexpr double kLogMagnitudeOffset = 1e-5;

struct SeparationModel {
  TdcnConfig config;
  bool iterative = false;
  // Learned basis only: analysis [N x 1 x W] (conv1d weight) and synthesis
  // [N x 1 x W] (transposed conv1d weight).
  ag::Tensor analysis;
  ag::Tensor synthesis;
  TdcnParams stage1;
  std::optional<TdcnParams> stage2;

  std::vector<std::pair<std::string, ag::Tensor>> Named() const;
  std::vector<ag::Tensor> Parameters() const;
};

SeparationModel InitModel(const TdcnConfig& config, bool iterative, std::uint64_t seed);

// ---- Differentiable basis layers -----------------------------------------

// log(|STFT(x)| + offset) of a waveform tensor [L] -> [bins x T].
ag::Tensor StftLogMagnitude(const ag::Tensor& waveform, const FrameSpec& spec);

// Synthesizes the waveform [target_len] from real masks [bins x T] applied
// to fixed complex STFT coefficients (frames x bins, row-major).
ag::Tensor MaskedIstft(const ag::Tensor& mask,
                       const std::vector<std::complex<double>>& coeffs,
                       const FrameSpec& spec, std::size_t target_len);

// ReLU(conv1d(pad(x), analysis, stride = hop)) -> [N x T].
ag::Tensor LearnedEncode(const ag::Tensor& waveform, const ag::Tensor& analysis,
                         const FrameSpec& spec);
// transposed_conv1d(coeffs, synthesis, stride = hop), cropped -> [target_len].
ag::Tensor LearnedDecode(const ag::Tensor& coeffs, const ag::Tensor& synthesis,
                         const FrameSpec& spec, std::size_t target_len);

// Differentiable uniform mixture-consistency projection.
std::vector<ag::Tensor> MixtureConsistency(const std::vector<ag::Tensor>& estimates,
                                           const ag::Tensor& mixture);

// ---- Forward passes -------------------------------------------------------

struct StageOutput {
  std::vector<ag::Tensor> masks;      // K x [N x T]
  std::vector<ag::Tensor> estimates;  // K x [L], mixture-consistent
};

// One entry per iteration (one for TDCN++, two for iTDCN++).
std::vector<StageOutput> ForwardModel(const SeparationModel& model,
                                      const Waveform& mixture);

std::vector<Waveform> Separate(const SeparationModel& model, const Waveform& mixture);

// Both iterations' estimates of an iterative model.
std::vector<std::vector<Waveform>> ItdcnForward(const SeparationModel& model,
                                                const Waveform& mixture);

// ---- Loss and training ----------------------------------------------------

struct PitTensorLoss {
  ag::Tensor loss;
  std::vector<std::size_t> permutation;
  std::vector<double> per_pair_losses;
};

// Negative SNR with stabilizer tau, as a tensor.
ag::Tensor NegSnrLossTensor(const Waveform& reference, const ag::Tensor& estimate,
                            double tau = kDefaultSnrStabilizer);

PitTensorLoss PitNegSnr(const std::vector<Waveform>& references,
                        const std::vector<ag::Tensor>& estimates,
                        double tau = kDefaultSnrStabilizer);

// Mean over iterations of the per-iteration PIT loss (permutation solved
// independently per iteration). `permutation` reports the last iteration.
PitTensorLoss ModelLoss(const SeparationModel& model, const MixtureExample& example,
                        double tau = kDefaultSnrStabilizer);

struct TrainOptions {
  std::size_t steps = 2000;
  std::size_t batch_size = 2;
  std::uint64_t seed = 1;
  ag::AdamOptions adam;
  // Random training crops of this length; 0 trains on whole examples.
  double crop_s = 0.5;
  double tau = kDefaultSnrStabilizer;
};

struct TrainLogRow {
  std::size_t step = 0;
  double loss = 0.0;
  std::vector<std::vector<std::size_t>> permutations;  // one per batch item
  double wall_s = 0.0;
};

using TrainCallback = std::function<void(const TrainLogRow&)>;

// Deterministic given (config, examples, options). Throws kNonFinite with
// the step index if the loss stops being finite.
SeparationModel Train(const TdcnConfig& config, bool iterative,
                      const std::vector<MixtureExample>& examples,
                      const TrainOptions& options, std::vector<TrainLogRow>* log = nullptr,
                      const TrainCallback& on_step = {});

// Continues training an existing model in place.
void TrainModel(SeparationModel& model, const std::vector<MixtureExample>& examples,
                const TrainOptions& options, std::vector<TrainLogRow>* log = nullptr,
                const TrainCallback& on_step = {});

// ---- Persistence ------------------------------------------------------------

std::string EncodeModelConfig(const TdcnConfig& config, bool iterative);
void DecodeModelConfig(const std::string& text, TdcnConfig* config, bool* iterative);

void SaveModel(const SeparationModel& model, const std::string& path);
SeparationModel LoadModel(const std::string& path);

}  // namespace unisep

#endif  // UNISEP_SEPARATOR_H_
