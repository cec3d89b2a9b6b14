// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/autograd/grad_check.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "unisep/error.h"
#include "unisep/signal.h"

namespace unisep::ag {
namespace {

double Evaluate(const std::function<Tensor()>& fn, std::vector<double>* kinks) {
  KinkRecorder recorder(kinks);
  const double v = fn().item();
  UNISEP_CHECK(std::isfinite(v), ErrorCode::kNonFinite,
               "grad check: function value is not finite");
  return v;
}

bool CrossesKink(const std::vector<double>& plus, const std::vector<double>& minus,
                 double margin) {
  if (plus.size() != minus.size()) return true;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    const double p = plus[i], m = minus[i];
    if ((p > 0.0) != (m > 0.0)) return true;
    const double half_move = 0.5 * std::abs(p - m);
    if (half_move > 0.0 && 0.5 * std::abs(p + m) <= margin * half_move) {
      return true;
    }
  }
  return false;
}

}  // namespace

GradCheckResult GradCheck(const std::function<Tensor()>& fn,
                          const std::vector<Tensor>& params,
                          const GradCheckOptions& options) {
  ZeroGrad(params);
  {
    Tensor loss = fn();
    UNISEP_CHECK(std::isfinite(loss.item()), ErrorCode::kNonFinite,
                 "grad check: function value is not finite");
    Backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (const Tensor& p : params) {
    UNISEP_CHECK(p.has_grad(), ErrorCode::kMissingGradient, "parameter has no gradient");
    for (double g : p.grad()) {
      UNISEP_CHECK(std::isfinite(g), ErrorCode::kNonFinite, "non-finite analytic gradient");
    }
    analytic.push_back(p.grad());
  }

  GradCheckResult result;
  Rng rng(options.seed);
  const double h = options.fd_step;
  std::vector<double> kinks_plus, kinks_minus;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor param = params[pi];
    std::vector<double>& theta = param.mutable_value();
    const std::size_t n = theta.size();
    const bool coordinate = n <= options.max_coordinates;
    const std::size_t probes = coordinate ? n : options.random_probes;
    std::vector<double> dir(n);
    for (std::size_t q = 0; q < probes; ++q) {
      if (coordinate) {
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[q] = 1.0;
      } else {
        double norm = 0.0;
        for (double& d : dir) {
          d = rng.Normal();
          norm += d * d;
        }
        norm = std::sqrt(norm);
        for (double& d : dir) d /= norm;
      }
      const std::vector<double> saved = theta;
      auto at = [&](double step, std::vector<double>* kinks) {
        for (std::size_t i = 0; i < n; ++i) theta[i] = saved[i] + step * dir[i];
        return Evaluate(fn, kinks);
      };
      std::optional<double> numeric;
      double step = h;
      for (std::size_t attempt = 0; attempt <= options.kink_retries; ++attempt, step *= 0.1) {
        kinks_plus.clear();
        kinks_minus.clear();
        const double f_plus2 = at(2.0 * step, &kinks_plus);
        const double f_minus2 = at(-2.0 * step, &kinks_minus);
        if (CrossesKink(kinks_plus, kinks_minus, options.kink_margin)) continue;
        const double f_plus = at(step, nullptr);
        const double f_minus = at(-step, nullptr);
        numeric = (8.0 * (f_plus - f_minus) - (f_plus2 - f_minus2)) / (12.0 * step);
        break;
      }
      theta = saved;
      if (!numeric) {
        ++result.skipped_kink_probes;
        continue;
      }
      double exact = 0.0;
      for (std::size_t i = 0; i < n; ++i) exact += analytic[pi][i] * dir[i];
      const double denom =
          std::max({std::abs(exact), std::abs(*numeric), options.abs_floor});
      result.max_relative_error =
          std::max(result.max_relative_error, std::abs(exact - *numeric) / denom);
      ++result.probes;
    }
  }
  return result;
}

}  // namespace unisep::ag
