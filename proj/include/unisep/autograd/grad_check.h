// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_AUTOGRAD_GRAD_CHECK_H_
#define UNISEP_AUTOGRAD_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "unisep/autograd/tensor.h"

namespace unisep::ag {

// Numeric derivatives use the five-point central stencil
// (8 (f(h) - f(-h)) - (f(2h) - f(-2h))) / 12h.
struct GradCheckOptions {
  double fd_step = 1e-3;
  // Parameters with at most this many entries are probed coordinate-wise;
  // larger ones get `random_probes` random unit directions instead.
  std::size_t max_coordinates = 64;
  std::size_t random_probes = 6;
  // A probe is skipped when some relu/prelu pre-activation changes sign
  // between the outer stencil points, or its midpoint lies within
  // kink_margin times its half-displacement of zero. For unit sensitivity
  // the outer points move by 2 * fd_step, so this demands
  // |pre| > 10 * fd_step.
  double kink_margin = 5.0;
  // Such probes are retried this many times, dividing the step by 10 each
  // time, before being skipped.
  std::size_t kink_retries = 2;
  // Denominator floor for the relative error; gradients below it are
  // compared in absolute terms.
  double abs_floor = 1e-6;
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t probes = 0;
  std::size_t skipped_kink_probes = 0;
};

// Compares analytic gradients of the scalar fn(params) against central
// differences. fn must rebuild its graph from the current parameter values
// on every call. Throws kNonFinite if any evaluation is not finite.
GradCheckResult GradCheck(const std::function<Tensor()>& fn,
                          const std::vector<Tensor>& params,
                          const GradCheckOptions& options = {});

}  // namespace unisep::ag

#endif  // UNISEP_AUTOGRAD_GRAD_CHECK_H_
