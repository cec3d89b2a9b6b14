// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Python bindings. Waveforms cross the boundary as 1-D float64 arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "unisep/error.h"
#include "unisep/harness.h"
#include "unisep/masking.h"
#include "unisep/objectives.h"
#include "unisep/separator.h"
#include "unisep/transforms.h"
#include "unisep/wav.h"

namespace py = pybind11;

namespace unisep {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Waveform ToWaveform(const Array& a, int rate) {
  if (a.ndim() != 1) throw Error(ErrorCode::kShapeMismatch, "expected a 1-D array");
  return Waveform(std::vector<double>(a.data(), a.data() + a.size()), rate);
}

Array ToArray(const Waveform& w) {
  Array out(static_cast<py::ssize_t>(w.size()));
  std::copy(w.samples.begin(), w.samples.end(), out.mutable_data());
  return out;
}

std::vector<Waveform> ToWaveforms(const std::vector<Array>& arrays, int rate) {
  std::vector<Waveform> out;
  for (const auto& a : arrays) out.push_back(ToWaveform(a, rate));
  return out;
}

std::vector<Array> ToArrays(const std::vector<Waveform>& ws) {
  std::vector<Array> out;
  for (const auto& w : ws) out.push_back(ToArray(w));
  return out;
}

}  // namespace
}  // namespace unisep

PYBIND11_MODULE(_unisep, m) {
  using namespace unisep;
  m.doc() = "Universal sound separation core";

  py::register_exception<Error>(m, "UnisepError");

  m.attr("DEFAULT_SAMPLE_RATE") = kDefaultSampleRate;

  m.def(
      "read_wav",
      [](const std::string& path) {
        const Waveform w = ReadWav(path);
        return py::make_tuple(ToArray(w), w.sample_rate_hz);
      },
      py::arg("path"), "Reads a mono WAV file; returns (samples, sample_rate).");
  m.def(
      "write_wav",
      [](const std::string& path, const Array& samples, int rate) {
        WriteWav(ToWaveform(samples, rate), path);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate") = kDefaultSampleRate,
      "Writes a mono float32 WAV file.");

  m.def(
      "si_sdr", [](const Array& ref, const Array& est) { return SiSdr(ToWaveform(ref, kDefaultSampleRate), ToWaveform(est, kDefaultSampleRate)); },
      py::arg("reference"), py::arg("estimate"));
  m.def(
      "si_sdr_improvement",
      [](const Array& ref, const Array& est, const Array& mix) {
        const int r = kDefaultSampleRate;
        return SiSdrImprovement(ToWaveform(ref, r), ToWaveform(est, r), ToWaveform(mix, r));
      },
      py::arg("reference"), py::arg("estimate"), py::arg("mixture"));

  m.def(
      "stft_roundtrip",
      [](const Array& x, double window_ms) {
        const Waveform w = ToWaveform(x, kDefaultSampleRate);
        return ToArray(Istft(Stft(w, FrameSpec::FromWindowMs(window_ms)), w.size()));
      },
      py::arg("samples"), py::arg("window_ms"), "Analysis followed by synthesis.");

  m.def(
      "mixture_consistency",
      [](const std::vector<Array>& estimates, const Array& mixture) {
        const int r = kDefaultSampleRate;
        return ToArrays(MixtureConsistency(ToWaveforms(estimates, r), ToWaveform(mixture, r)));
      },
      py::arg("estimates"), py::arg("mixture"));

  m.def(
      "separate_oracle",
      [](const Array& mixture, const std::vector<Array>& references, double window_ms) {
        const int r = kDefaultSampleRate;
        return ToArrays(SeparateOracle(ToWaveform(mixture, r), ToWaveforms(references, r),
                                       FrameSpec::FromWindowMs(window_ms)));
      },
      py::arg("mixture"), py::arg("references"), py::arg("window_ms"),
      "Ideal binary mask separation.");

  py::class_<SeparationModel>(m, "Model")
      .def_static("load", &LoadModel, py::arg("path"))
      .def("save", [](const SeparationModel& model, const std::string& path) { SaveModel(model, path); },
           py::arg("path"))
      .def(
          "separate",
          [](const SeparationModel& model, const Array& mixture) {
            return ToArrays(Separate(model, ToWaveform(mixture, kDefaultSampleRate)));
          },
          py::arg("mixture"));

  m.def(
      "init_model",
      [](const std::string& basis, double window_ms, bool iterative, std::uint64_t seed) {
        TdcnConfig config;
        config.basis_kind = ParseBasisKind(basis);
        config.frame_spec = FrameSpec::FromWindowMs(window_ms);
        return InitModel(config, iterative, seed);
      },
      py::arg("basis") = "stft", py::arg("window_ms") = 5.0, py::arg("iterative") = false,
      py::arg("seed") = 1, "Untrained model with the default network size.");

  m.def("checksum_hex", [](const py::bytes& b) { return ChecksumHex(std::string(b)); }, py::arg("data"));
}
