// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/autograd/adam.h"

#include <cmath>

#include "unisep/error.h"

namespace unisep::ag {

AdamState InitAdam(const std::vector<Tensor>& params, const AdamOptions& options) {
  AdamState state;
  state.options = options;
  for (const Tensor& p : params) {
    state.m.emplace_back(p.size(), 0.0);
    state.v.emplace_back(p.size(), 0.0);
  }
  return state;
}

void AdamStep(std::vector<Tensor>& params, AdamState& state) {
  UNISEP_CHECK(params.size() == state.m.size(), ErrorCode::kShapeMismatch,
               "optimizer state does not match the parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    UNISEP_CHECK(params[i].has_grad(), ErrorCode::kMissingGradient,
                 "parameter " + std::to_string(i) + " has no gradient");
    UNISEP_CHECK(state.m[i].size() == params[i].size(), ErrorCode::kShapeMismatch,
                 "optimizer moment shape mismatch");
  }
  const AdamOptions& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double>& theta = params[i].mutable_value();
    const std::vector<double>& g = params[i].grad();
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      theta[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

}  // namespace unisep::ag
