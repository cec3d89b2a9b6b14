// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Experiment harness behind the command-line tool: experiment configs,
// PIT-aligned evaluation reports, oracle evaluation, window sweeps and the
// gradient-check suite. Every table is written as UTF-8 CSV with a header
// row; floating-point cells use the shortest round-trip form.

#ifndef UNISEP_HARNESS_H_
#define UNISEP_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unisep/datagen.h"
#include "unisep/separator.h"

namespace unisep {

inline constexpr double kStandardWindowsMs[] = {2.5, 5.0, 10.0, 25.0, 50.0};

// ---- Experiment config ------------------------------------------------------

struct ExperimentConfig {
  std::string task = "toy";
  BasisKind basis_kind = BasisKind::kStft;
  double window_ms = 5.0;  // hop is always half the window
  bool iterative = false;
  std::size_t n_basis = 64;
  std::size_t bottleneck = 32;
  std::size_t conv_channels = 64;
  std::size_t skip_channels = 32;
  std::size_t kernel = 3;
  std::size_t blocks_per_repeat = 4;
  std::size_t repeats = 2;
  std::size_t sources = 2;
  bool feature_norm = true;
  int sample_rate_hz = kDefaultSampleRate;
  std::size_t steps = 2000;
  std::size_t batch_size = 2;
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  double crop_s = 0.5;
  std::string manifest_path;
  std::string output_dir;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws kInvalidArgument on a window outside kStandardWindowsMs, a
// non-positive size, or a string that a config file cannot carry.
void ValidateExperimentConfig(const ExperimentConfig& config);

TdcnConfig ModelConfigFor(const ExperimentConfig& config);
TrainOptions TrainOptionsFor(const ExperimentConfig& config);

std::string EmitExperimentConfig(const ExperimentConfig& config);
ExperimentConfig ParseExperimentConfig(const std::string& text);
void SaveExperimentConfig(const ExperimentConfig& config, const std::string& path);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// ---- Evaluation ---------------------------------------------------------------

struct EvalRow {
  std::string mixture_id;
  std::size_t source = 0;    // reference index
  std::size_t estimate = 0;  // estimate assigned to this reference
  double input_si_sdr = 0.0;
  double output_si_sdr = 0.0;
  double si_sdri = 0.0;
  bool excluded = false;  // non-finite SI-SDRi
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_si_sdri = 0.0;
  double median_si_sdri = 0.0;
  std::size_t counted = 0;
  std::size_t excluded = 0;
  std::vector<std::pair<std::string, std::string>> settings;

  // Recomputes the aggregates from `rows`.
  void Aggregate();
};

// PIT alignment maximizing summed SI-SDR; pair scores are clamped to
// +-1000 dB for the assignment only.
EvalReport Evaluate(const std::vector<MixtureExample>& examples,
                    const std::vector<std::vector<Waveform>>& estimates);

EvalReport EvaluateModel(const SeparationModel& model,
                         const std::vector<MixtureExample>& examples);

EvalReport OracleEvaluate(const std::vector<MixtureExample>& examples, const FrameSpec& spec);

void WriteReportCsv(const EvalReport& report, const std::string& path);
// Rows only; aggregates are recomputed.
EvalReport ReadReportCsv(const std::string& path);
void WriteSummaryCsv(const EvalReport& report, const std::string& path);

// ---- Dataset access ---------------------------------------------------------

// Loads one split of a rendered dataset root (manifest.jsonl + WAV tree).
std::vector<MixtureExample> LoadSplit(const std::string& root, Split split);

// ---- Sweeps -------------------------------------------------------------------

struct SweepRow {
  double window_ms = 0.0;
  double mean_si_sdri = 0.0;
  double median_si_sdri = 0.0;
  std::size_t counted = 0;
  std::size_t excluded = 0;
  std::string status = "ok";
};

// One oracle evaluation per window. With a non-empty `out_dir`, each
// window's report goes to out_dir/window_<ms>/report.csv.
std::vector<SweepRow> OracleSweep(const std::vector<MixtureExample>& examples,
                                  const std::vector<double>& windows_ms,
                                  const std::string& out_dir = "");

// Trains a fresh model per window from `base` and evaluates it on `test`.
std::vector<SweepRow> TrainSweep(const ExperimentConfig& base,
                                 const std::vector<MixtureExample>& train,
                                 const std::vector<MixtureExample>& test,
                                 const std::vector<double>& windows_ms,
                                 const std::string& out_dir = "");

void WriteSweepCsv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> ReadSweepCsv(const std::string& path);

std::string WindowDirName(double window_ms);

// ---- Training log -------------------------------------------------------------

// Columns: step, loss, permutation, wall_s. A permutation is written as
// its digits, batch items separated by '|'.
void WriteTrainLogCsv(const std::vector<TrainLogRow>& log, const std::string& path);

// ---- Gradient-check suite -------------------------------------------------------

inline constexpr double kOperatorGradTolerance = 1e-6;
inline constexpr double kEndToEndGradTolerance = 1e-4;

// Operators are checked at kOperatorGradTolerance; composite networks and
// full training losses at kEndToEndGradTolerance.
struct GradCheckEntry {
  std::string name;
  std::string kind;  // "operator", "network" or "end-to-end"
  double worst_relative_error = 0.0;
  std::size_t probes = 0;
  std::size_t skipped = 0;
  double threshold = 0.0;
  bool passed = false;
};

// N=8, B=4, H=8, Sc=4, X=2, R=1, P=3, K=2. STFT uses a 16-sample window
// (9 bins) and the learned basis an 8-sample window; grad-check signals
// span 32 frames.
TdcnConfig TinyGradCheckConfig(BasisKind basis);
std::size_t TinyGradCheckLength(BasisKind basis);

std::vector<std::string> RegisteredGradChecks();

// Runs every registered check. `threshold` overrides the per-kind default
// tolerances.
std::vector<GradCheckEntry> RunGradCheckSuite(std::optional<double> threshold = std::nullopt,
                                              std::uint64_t seed = 1);

void WriteGradCheckCsv(const std::vector<GradCheckEntry>& entries, const std::string& path);

// ---- Utilities ----------------------------------------------------------------

std::string FormatDouble(double v);
double ParseDouble(const std::string& text);
// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string ChecksumHex(const std::string& bytes);
std::string ReadFileBytes(const std::string& path);

}  // namespace unisep

#endif  // UNISEP_HARNESS_H_
