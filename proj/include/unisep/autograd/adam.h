// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_AUTOGRAD_ADAM_H_
#define UNISEP_AUTOGRAD_ADAM_H_

#include <cstdint>
#include <vector>

#include "unisep/autograd/tensor.h"

namespace unisep::ag {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  AdamOptions options;
};

AdamState InitAdam(const std::vector<Tensor>& params, const AdamOptions& options = {});

// Bias-corrected Adam update in place. Throws kMissingGradient when a
// parameter has no gradient buffer.
void AdamStep(std::vector<Tensor>& params, AdamState& state);

}  // namespace unisep::ag

#endif  // UNISEP_AUTOGRAD_ADAM_H_
