// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/masking.h"

#include <cmath>
#include <limits>

#include "unisep/error.h"

namespace unisep {

std::vector<CoeffFrames> ApplyMasks(const MaskSet& masks,
                                    const CoeffFrames& mixture_coeffs) {
  UNISEP_CHECK(masks.frames == mixture_coeffs.frames &&
                   masks.n_bins == mixture_coeffs.n_bins &&
                   masks.values.size() == masks.sources * masks.frames * masks.n_bins,
               ErrorCode::kShapeMismatch, "mask set does not match coefficients");
  for (double m : masks.values) {
    UNISEP_CHECK(m >= 0.0 && m <= 1.0, ErrorCode::kRangeViolation, "mask value outside [0, 1]");
  }
  std::vector<CoeffFrames> out(masks.sources, mixture_coeffs);
  for (std::size_t k = 0; k < masks.sources; ++k) {
    for (std::size_t t = 0; t < masks.frames; ++t) {
      for (std::size_t n = 0; n < masks.n_bins; ++n) {
        out[k].at(t, n) = masks.at(k, t, n) * mixture_coeffs.at(t, n);
      }
    }
  }
  return out;
}

std::vector<Waveform> MixtureConsistency(const std::vector<Waveform>& estimates,
                                         const Waveform& mixture) {
  const std::size_t k = estimates.size();
  UNISEP_CHECK(k > 0, ErrorCode::kInvalidArgument, "no estimates");
  for (const auto& e : estimates) {
    UNISEP_CHECK(e.size() == mixture.size(), ErrorCode::kShapeMismatch,
                 "estimate length differs from mixture");
  }
  std::vector<double> residual = mixture.samples;
  std::vector<double> magnitude(mixture.size());
  for (std::size_t i = 0; i < residual.size(); ++i) magnitude[i] = std::abs(mixture.samples[i]);
  for (const auto& e : estimates) {
    for (std::size_t i = 0; i < residual.size(); ++i) {
      residual[i] -= e.samples[i];
      magnitude[i] += std::abs(e.samples[i]);
    }
  }
  // Residuals within the rounding error of the sum are left alone, which
  // makes the projection exactly idempotent.
  const double tolerance = 4.0 * static_cast<double>(k + 1) *
                           std::numeric_limits<double>::epsilon();
  std::vector<Waveform> out = estimates;
  const double share = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (std::abs(residual[i]) <= tolerance * magnitude[i]) continue;
    for (auto& e : out) e.samples[i] += residual[i] * share;
  }
  return out;
}

MaskSet OracleBinaryMask(const std::vector<CoeffFrames>& refs,
                         const FrameSpec& spec) {
  UNISEP_CHECK(refs.size() >= 2, ErrorCode::kInvalidArgument,
               "oracle mask needs at least two references");
  const CoeffFrames& first = refs.front();
  for (const auto& r : refs) {
    UNISEP_CHECK(r.kind == CoeffKind::kComplexStft, ErrorCode::kInvalidArgument,
                 "oracle mask needs complex_stft references");
    UNISEP_CHECK(r.frames == first.frames && r.n_bins == first.n_bins && r.spec == spec,
                 ErrorCode::kShapeMismatch, "reference coefficient shapes differ");
  }
  MaskSet m;
  m.sources = refs.size();
  m.frames = first.frames;
  m.n_bins = first.n_bins;
  m.values.assign(m.sources * m.frames * m.n_bins, 0.0);
  for (std::size_t t = 0; t < m.frames; ++t) {
    for (std::size_t n = 0; n < m.n_bins; ++n) {
      std::size_t best = 0;
      double best_mag = std::abs(refs[0].at(t, n));
      for (std::size_t k = 1; k < refs.size(); ++k) {
        const double mag = std::abs(refs[k].at(t, n));
        if (mag > best_mag) {
          best_mag = mag;
          best = k;
        }
      }
      m.at(best, t, n) = 1.0;
    }
  }
  return m;
}

std::vector<Waveform> SeparateOracle(const Waveform& mixture,
                                     const std::vector<Waveform>& references,
                                     const FrameSpec& spec) {
  std::vector<CoeffFrames> ref_coeffs;
  ref_coeffs.reserve(references.size());
  for (const auto& r : references) {
    UNISEP_CHECK(r.size() == mixture.size() && r.sample_rate_hz == mixture.sample_rate_hz,
                 ErrorCode::kShapeMismatch, "references must match the mixture");
    ref_coeffs.push_back(Stft(r, spec));
  }
  const MaskSet masks = OracleBinaryMask(ref_coeffs, spec);
  const CoeffFrames mix = Stft(mixture, spec);
  std::vector<Waveform> out;
  for (const auto& c : ApplyMasks(masks, mix)) out.push_back(Istft(c, mixture.size()));
  return out;
}

}  // namespace unisep
