// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "unisep/autograd/grad_check.h"
#include "unisep/autograd/ops.h"
#include "unisep/error.h"
#include "unisep/masking.h"
#include "unisep/objectives.h"
#include "unisep/wav.h"

namespace unisep {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---- Utilities ----------------------------------------------------------------

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  UNISEP_CHECK(res.ec == std::errc() && res.ptr == text.data() + text.size(),
               ErrorCode::kFormatError, "not a number: '" + text + "'");
  return v;
}

std::string ChecksumHex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  UNISEP_CHECK(in.good(), ErrorCode::kIoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

// Header-checked CSV rows.
std::vector<std::vector<std::string>> ReadCsv(const std::string& path,
                                              const std::vector<std::string>& header) {
  std::istringstream in(ReadFileBytes(path));
  std::string line;
  UNISEP_CHECK(static_cast<bool>(std::getline(in, line)), ErrorCode::kFormatError,
               path + ": missing header");
  UNISEP_CHECK(SplitCsvLine(line) == header, ErrorCode::kFormatError,
               path + ": unexpected header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = SplitCsvLine(line);
    UNISEP_CHECK(fields.size() == header.size(), ErrorCode::kFormatError,
                 path + ": wrong field count in '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::ofstream OpenForWrite(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  UNISEP_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  return out;
}

std::size_t ParseSize(const std::string& s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  UNISEP_CHECK(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kFormatError,
               "not a non-negative integer: '" + s + "'");
  return v;
}

bool IsStandardWindow(double ms) {
  return std::find(std::begin(kStandardWindowsMs), std::end(kStandardWindowsMs), ms) !=
         std::end(kStandardWindowsMs);
}

void CheckConfigString(const std::string& name, const std::string& value) {
  const bool bad = value.find_first_of("\n\r") != std::string::npos ||
                   (!value.empty() && (std::isspace(static_cast<unsigned char>(value.front())) ||
                                       std::isspace(static_cast<unsigned char>(value.back()))));
  UNISEP_CHECK(!bad, ErrorCode::kInvalidArgument,
               name + " must not contain line breaks or surrounding spaces");
}

}  // namespace

// ---- Experiment config ------------------------------------------------------

void ValidateExperimentConfig(const ExperimentConfig& c) {
  if (!IsStandardWindow(c.window_ms)) {
    std::string allowed;
    for (double w : kStandardWindowsMs) allowed += (allowed.empty() ? "" : ", ") + FormatDouble(w);
    throw Error(ErrorCode::kInvalidArgument,
                "window_ms " + FormatDouble(c.window_ms) + " is not one of {" + allowed + "}");
  }
  UNISEP_CHECK(c.steps >= 1 && c.batch_size >= 1, ErrorCode::kInvalidArgument,
               "steps and batch_size must be >= 1");
  UNISEP_CHECK(c.learning_rate > 0.0 && std::isfinite(c.learning_rate),
               ErrorCode::kInvalidArgument, "learning_rate must be positive");
  UNISEP_CHECK(c.crop_s >= 0.0 && std::isfinite(c.crop_s), ErrorCode::kInvalidArgument,
               "crop_s must be >= 0");
  CheckConfigString("task", c.task);
  CheckConfigString("manifest", c.manifest_path);
  CheckConfigString("output_dir", c.output_dir);
  ValidateTdcnConfig(ModelConfigFor(c));
}

TdcnConfig ModelConfigFor(const ExperimentConfig& c) {
  TdcnConfig m;
  m.n_basis = c.n_basis;
  m.bottleneck = c.bottleneck;
  m.conv_channels = c.conv_channels;
  m.skip_channels = c.skip_channels;
  m.kernel = c.kernel;
  m.blocks_per_repeat = c.blocks_per_repeat;
  m.repeats = c.repeats;
  m.sources = c.sources;
  m.basis_kind = c.basis_kind;
  m.frame_spec = FrameSpec::FromWindowMs(c.window_ms, c.sample_rate_hz);
  m.feature_norm = c.feature_norm;
  return m;
}

TrainOptions TrainOptionsFor(const ExperimentConfig& c) {
  TrainOptions o;
  o.steps = c.steps;
  o.batch_size = c.batch_size;
  o.seed = c.seed;
  o.adam.learning_rate = c.learning_rate;
  o.crop_s = c.crop_s;
  return o;
}

std::string EmitExperimentConfig(const ExperimentConfig& c) {
  ValidateExperimentConfig(c);
  pt::ptree t;
  t.put("experiment.task", c.task);
  t.put("experiment.manifest", c.manifest_path);
  t.put("experiment.output_dir", c.output_dir);
  t.put("model.basis", BasisKindName(c.basis_kind));
  t.put("model.window_ms", FormatDouble(c.window_ms));
  t.put("model.iterative", c.iterative ? "true" : "false");
  t.put("model.n_basis", c.n_basis);
  t.put("model.bottleneck", c.bottleneck);
  t.put("model.conv_channels", c.conv_channels);
  t.put("model.skip_channels", c.skip_channels);
  t.put("model.kernel", c.kernel);
  t.put("model.blocks_per_repeat", c.blocks_per_repeat);
  t.put("model.repeats", c.repeats);
  t.put("model.sources", c.sources);
  t.put("model.feature_norm", c.feature_norm ? "true" : "false");
  t.put("model.sample_rate_hz", c.sample_rate_hz);
  t.put("train.steps", c.steps);
  t.put("train.batch_size", c.batch_size);
  t.put("train.seed", c.seed);
  t.put("train.learning_rate", FormatDouble(c.learning_rate));
  t.put("train.crop_s", FormatDouble(c.crop_s));
  std::ostringstream out;
  pt::write_ini(out, t);
  return out.str();
}

ExperimentConfig ParseExperimentConfig(const std::string& text) {
  pt::ptree t;
  std::istringstream in(text);
  ExperimentConfig c;
  try {
    pt::read_ini(in, t);
    static const std::map<std::string, std::set<std::string>> kKnown = {
        {"experiment", {"task", "manifest", "output_dir"}},
        {"model", {"basis", "window_ms", "iterative", "n_basis", "bottleneck", "conv_channels",
                   "skip_channels", "kernel", "blocks_per_repeat", "repeats", "sources",
                   "feature_norm", "sample_rate_hz"}},
        {"train", {"steps", "batch_size", "seed", "learning_rate", "crop_s"}},
    };
    for (const auto& [section, keys] : t) {
      const auto known = kKnown.find(section);
      UNISEP_CHECK(known != kKnown.end(), ErrorCode::kFormatError,
                   "unknown config section [" + section + "]");
      for (const auto& entry : keys) {
        UNISEP_CHECK(known->second.count(entry.first) > 0, ErrorCode::kFormatError,
                     "unknown config key " + section + "." + entry.first);
      }
    }
    c.task = t.get("experiment.task", c.task);
    c.manifest_path = t.get("experiment.manifest", c.manifest_path);
    c.output_dir = t.get("experiment.output_dir", c.output_dir);
    c.basis_kind = ParseBasisKind(t.get("model.basis", std::string(BasisKindName(c.basis_kind))));
    c.window_ms = ParseDouble(t.get("model.window_ms", FormatDouble(c.window_ms)));
    c.iterative = t.get("model.iterative", c.iterative);
    c.n_basis = t.get("model.n_basis", c.n_basis);
    c.bottleneck = t.get("model.bottleneck", c.bottleneck);
    c.conv_channels = t.get("model.conv_channels", c.conv_channels);
    c.skip_channels = t.get("model.skip_channels", c.skip_channels);
    c.kernel = t.get("model.kernel", c.kernel);
    c.blocks_per_repeat = t.get("model.blocks_per_repeat", c.blocks_per_repeat);
    c.repeats = t.get("model.repeats", c.repeats);
    c.sources = t.get("model.sources", c.sources);
    c.feature_norm = t.get("model.feature_norm", c.feature_norm);
    c.sample_rate_hz = t.get("model.sample_rate_hz", c.sample_rate_hz);
    c.steps = t.get("train.steps", c.steps);
    c.batch_size = t.get("train.batch_size", c.batch_size);
    c.seed = t.get("train.seed", c.seed);
    c.learning_rate = ParseDouble(t.get("train.learning_rate", FormatDouble(c.learning_rate)));
    c.crop_s = ParseDouble(t.get("train.crop_s", FormatDouble(c.crop_s)));
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad config file: ") + e.what());
  }
  ValidateExperimentConfig(c);
  return c;
}

void SaveExperimentConfig(const ExperimentConfig& config, const std::string& path) {
  auto out = OpenForWrite(path);
  out << EmitExperimentConfig(config);
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  return ParseExperimentConfig(ReadFileBytes(path));
}

// ---- Evaluation ---------------------------------------------------------------

void EvalReport::Aggregate() {
  std::vector<double> finite;
  excluded = 0;
  for (auto& r : rows) {
    r.excluded = !std::isfinite(r.si_sdri);
    if (r.excluded) {
      ++excluded;
    } else {
      finite.push_back(r.si_sdri);
    }
  }
  counted = finite.size();
  if (finite.empty()) {
    mean_si_sdri = median_si_sdri = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean_si_sdri = std::accumulate(finite.begin(), finite.end(), 0.0) /
                 static_cast<double>(finite.size());
  std::sort(finite.begin(), finite.end());
  const std::size_t n = finite.size();
  median_si_sdri = n % 2 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
}

EvalReport Evaluate(const std::vector<MixtureExample>& examples,
                    const std::vector<std::vector<Waveform>>& estimates) {
  UNISEP_CHECK(examples.size() == estimates.size(), ErrorCode::kShapeMismatch,
               "estimate sets do not match the examples");
  EvalReport report;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const auto& est = estimates[i];
    const std::size_t k = ex.references.size();
    UNISEP_CHECK(est.size() == k, ErrorCode::kShapeMismatch,
                 ex.id + ": " + std::to_string(est.size()) + " estimates for " +
                     std::to_string(k) + " references");
    std::vector<double> score(k * k);
    for (std::size_t e = 0; e < k; ++e)
      for (std::size_t r = 0; r < k; ++r)
        score[e * k + r] = SiSdr(ex.references[r], est[e]);
    std::vector<double> cost(k * k);
    for (std::size_t j = 0; j < k * k; ++j) cost[j] = -std::clamp(score[j], -1000.0, 1000.0);
    const auto perm = BestPermutation(cost, k);
    std::vector<EvalRow> rows(k);
    for (std::size_t e = 0; e < k; ++e) {
      EvalRow& row = rows[perm[e]];
      row.mixture_id = ex.id;
      row.source = perm[e];
      row.estimate = e;
      row.output_si_sdr = score[e * k + perm[e]];
      row.input_si_sdr = SiSdr(ex.references[perm[e]], ex.mixture);
      row.si_sdri = row.output_si_sdr - row.input_si_sdr;
    }
    for (auto& r : rows) report.rows.push_back(r);
  }
  report.Aggregate();
  return report;
}

EvalReport EvaluateModel(const SeparationModel& model,
                         const std::vector<MixtureExample>& examples) {
  std::vector<std::vector<Waveform>> estimates;
  for (const auto& ex : examples) estimates.push_back(Separate(model, ex.mixture));
  EvalReport report = Evaluate(examples, estimates);
  const TdcnConfig& c = model.config;
  report.settings = {{"system", model.iterative ? "itdcn++" : "tdcn++"},
                     {"basis", BasisKindName(c.basis_kind)},
                     {"window_ms", FormatDouble(c.frame_spec.window_ms())},
                     {"hop", std::to_string(c.frame_spec.hop)}};
  return report;
}

EvalReport OracleEvaluate(const std::vector<MixtureExample>& examples, const FrameSpec& spec) {
  std::vector<std::vector<Waveform>> estimates;
  for (const auto& ex : examples) estimates.push_back(SeparateOracle(ex.mixture, ex.references, spec));
  EvalReport report = Evaluate(examples, estimates);
  report.settings = {{"system", "oracle-binary-mask"},
                     {"window_ms", FormatDouble(spec.window_ms())},
                     {"hop", std::to_string(spec.hop)}};
  return report;
}

namespace {
const std::vector<std::string> kReportHeader = {"mixture_id", "source", "estimate",
                                                "input_si_sdr", "output_si_sdr", "si_sdri",
                                                "excluded"};
const std::vector<std::string> kSweepHeader = {"window_ms", "mean_si_sdri", "median_si_sdri",
                                               "counted", "excluded", "status"};
}  // namespace

void WriteReportCsv(const EvalReport& report, const std::string& path) {
  auto out = OpenForWrite(path);
  for (std::size_t i = 0; i < kReportHeader.size(); ++i)
    out << (i ? "," : "") << kReportHeader[i];
  out << '\n';
  for (const auto& r : report.rows) {
    out << CsvField(r.mixture_id) << ',' << r.source << ',' << r.estimate << ','
        << FormatDouble(r.input_si_sdr) << ',' << FormatDouble(r.output_si_sdr) << ','
        << FormatDouble(r.si_sdri) << ',' << (r.excluded ? 1 : 0) << '\n';
  }
}

EvalReport ReadReportCsv(const std::string& path) {
  EvalReport report;
  for (const auto& f : ReadCsv(path, kReportHeader)) {
    EvalRow r;
    r.mixture_id = f[0];
    r.source = ParseSize(f[1]);
    r.estimate = ParseSize(f[2]);
    r.input_si_sdr = ParseDouble(f[3]);
    r.output_si_sdr = ParseDouble(f[4]);
    r.si_sdri = ParseDouble(f[5]);
    report.rows.push_back(r);
  }
  report.Aggregate();
  return report;
}

void WriteSummaryCsv(const EvalReport& report, const std::string& path) {
  auto out = OpenForWrite(path);
  out << "key,value\n";
  out << "rows," << report.rows.size() << '\n';
  out << "counted," << report.counted << '\n';
  out << "excluded," << report.excluded << '\n';
  out << "mean_si_sdri," << FormatDouble(report.mean_si_sdri) << '\n';
  out << "median_si_sdri," << FormatDouble(report.median_si_sdri) << '\n';
  for (const auto& [k, v] : report.settings) out << CsvField(k) << ',' << CsvField(v) << '\n';
}

// ---- Dataset access ---------------------------------------------------------

std::vector<MixtureExample> LoadSplit(const std::string& root, Split split) {
  DatasetManifest m = ReadManifest((fs::path(root) / "manifest.jsonl").string());
  std::vector<MixtureExample> out;
  for (const auto* r : m.RecipesFor(split))
    out.push_back(ReadExample((fs::path(root) / r->output_path).string(), m.sources, r->id));
  return out;
}

// ---- Sweeps -------------------------------------------------------------------

std::string WindowDirName(double window_ms) { return "window_" + FormatDouble(window_ms) + "ms"; }

namespace {

SweepRow RowFrom(double window_ms, const EvalReport& report) {
  SweepRow row;
  row.window_ms = window_ms;
  row.mean_si_sdri = report.mean_si_sdri;
  row.median_si_sdri = report.median_si_sdri;
  row.counted = report.counted;
  row.excluded = report.excluded;
  return row;
}

SweepRow FailedRow(double window_ms, const std::string& message) {
  SweepRow row;
  row.window_ms = window_ms;
  row.mean_si_sdri = row.median_si_sdri = std::numeric_limits<double>::quiet_NaN();
  row.status = "error: " + message;
  return row;
}

std::vector<double> SortedWindows(std::vector<double> windows) {
  UNISEP_CHECK(!windows.empty(), ErrorCode::kInvalidArgument, "no windows to sweep");
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  return windows;
}

}  // namespace

std::vector<SweepRow> OracleSweep(const std::vector<MixtureExample>& examples,
                                  const std::vector<double>& windows_ms,
                                  const std::string& out_dir) {
  std::vector<SweepRow> rows;
  for (double w : SortedWindows(windows_ms)) {
    try {
      const int rate = examples.empty() ? kDefaultSampleRate : examples[0].mixture.sample_rate_hz;
      EvalReport report = OracleEvaluate(examples, FrameSpec::FromWindowMs(w, rate));
      if (!out_dir.empty()) {
        const fs::path dir = fs::path(out_dir) / WindowDirName(w);
        WriteReportCsv(report, (dir / "report.csv").string());
        WriteSummaryCsv(report, (dir / "summary.csv").string());
      }
      rows.push_back(RowFrom(w, report));
    } catch (const std::exception& e) {
      rows.push_back(FailedRow(w, e.what()));
    }
  }
  return rows;
}

std::vector<SweepRow> TrainSweep(const ExperimentConfig& base,
                                 const std::vector<MixtureExample>& train,
                                 const std::vector<MixtureExample>& test,
                                 const std::vector<double>& windows_ms,
                                 const std::string& out_dir) {
  std::vector<SweepRow> rows;
  for (double w : SortedWindows(windows_ms)) {
    try {
      ExperimentConfig cfg = base;
      cfg.window_ms = w;
      ValidateExperimentConfig(cfg);
      std::vector<TrainLogRow> log;
      SeparationModel model =
          Train(ModelConfigFor(cfg), cfg.iterative, train, TrainOptionsFor(cfg), &log);
      EvalReport report = EvaluateModel(model, test);
      if (!out_dir.empty()) {
        const fs::path dir = fs::path(out_dir) / WindowDirName(w);
        fs::create_directories(dir);
        SaveModel(model, (dir / "model.ckpt").string());
        SaveExperimentConfig(cfg, (dir / "config.ini").string());
        WriteTrainLogCsv(log, (dir / "train_log.csv").string());
        WriteReportCsv(report, (dir / "report.csv").string());
        WriteSummaryCsv(report, (dir / "summary.csv").string());
      }
      rows.push_back(RowFrom(w, report));
    } catch (const std::exception& e) {
      rows.push_back(FailedRow(w, e.what()));
    }
  }
  return rows;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, const std::string& path) {
  auto out = OpenForWrite(path);
  for (std::size_t i = 0; i < kSweepHeader.size(); ++i) out << (i ? "," : "") << kSweepHeader[i];
  out << '\n';
  for (const auto& r : rows) {
    out << FormatDouble(r.window_ms) << ',' << FormatDouble(r.mean_si_sdri) << ','
        << FormatDouble(r.median_si_sdri) << ',' << r.counted << ',' << r.excluded << ','
        << CsvField(r.status) << '\n';
  }
}

std::vector<SweepRow> ReadSweepCsv(const std::string& path) {
  std::vector<SweepRow> rows;
  for (const auto& f : ReadCsv(path, kSweepHeader)) {
    SweepRow r;
    r.window_ms = ParseDouble(f[0]);
    r.mean_si_sdri = ParseDouble(f[1]);
    r.median_si_sdri = ParseDouble(f[2]);
    r.counted = ParseSize(f[3]);
    r.excluded = ParseSize(f[4]);
    r.status = f[5];
    rows.push_back(r);
  }
  return rows;
}

// ---- Training log -------------------------------------------------------------

void WriteTrainLogCsv(const std::vector<TrainLogRow>& log, const std::string& path) {
  auto out = OpenForWrite(path);
  out << "step,loss,permutation,wall_s\n";
  for (const auto& row : log) {
    std::string perms;
    for (std::size_t b = 0; b < row.permutations.size(); ++b) {
      if (b) perms += '|';
      for (std::size_t v : row.permutations[b]) perms += std::to_string(v);
    }
    out << row.step << ',' << FormatDouble(row.loss) << ',' << perms << ','
        << FormatDouble(row.wall_s) << '\n';
  }
}

// ---- Gradient-check suite -------------------------------------------------------

TdcnConfig TinyGradCheckConfig(BasisKind basis) {
  TdcnConfig c;
  c.n_basis = 8;
  c.bottleneck = 4;
  c.conv_channels = 8;
  c.skip_channels = 4;
  c.blocks_per_repeat = 2;
  c.repeats = 1;
  c.kernel = 3;
  c.sources = 2;
  c.basis_kind = basis;
  c.frame_spec = FrameSpec::FromWindowLength(basis == BasisKind::kStft ? 16 : 8);
  return c;
}

std::size_t TinyGradCheckLength(BasisKind basis) {
  const FrameSpec spec = TinyGradCheckConfig(basis).frame_spec;
  // 32 frames: (32 - 1) * hop samples.
  return 31 * spec.hop;
}

namespace {

using ag::Tensor;

struct CheckCase {
  std::function<Tensor()> loss;
  std::vector<Tensor> params;
  double fd_step = ag::GradCheckOptions().fd_step;
};

struct RegisteredCheck {
  std::string name;
  std::string kind;
  std::function<CheckCase(Rng&)> build;
};

std::vector<double> Draw(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.Uniform(lo, hi);
  return v;
}

Tensor Param(Rng& rng, ag::Shape shape, double lo = -1.0, double hi = 1.0) {
  return Tensor::Parameter(shape, Draw(rng, ag::NumElements(shape), lo, hi));
}

// Projects an op output onto fixed random weights so every output entry
// contributes a distinct gradient.
CheckCase Probe(Rng& rng, std::function<Tensor()> op, std::vector<Tensor> params) {
  const Tensor sample = op();
  Tensor weights = Tensor::Constant(sample.shape(), Draw(rng, sample.size()));
  return {[op, weights] { return ag::ReduceSum(ag::Mul(op(), weights)); }, std::move(params)};
}

Waveform RandomWave(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 0.3 * rng.Normal();
  return Waveform(std::move(v), kDefaultSampleRate);
}

CheckCase EndToEnd(Rng& rng, BasisKind basis, bool iterative) {
  const TdcnConfig config = TinyGradCheckConfig(basis);
  const std::size_t len = TinyGradCheckLength(basis);
  auto model = std::make_shared<SeparationModel>(InitModel(config, iterative, rng.NextU64()));
  auto ex = std::make_shared<MixtureExample>();
  ex->references = {RandomWave(rng, len), RandomWave(rng, len)};
  ex->mixture = Waveform(std::vector<double>(len), kDefaultSampleRate);
  for (const auto& r : ex->references)
    for (std::size_t i = 0; i < len; ++i) ex->mixture.samples[i] += r.samples[i];
  return {[model, ex] { return ModelLoss(*model, *ex).loss; }, model->Parameters()};
}

const std::vector<RegisteredCheck>& Registry() {
  static const std::vector<RegisteredCheck> checks = [] {
    std::vector<RegisteredCheck> c;
    auto op = [&c](std::string name, std::function<CheckCase(Rng&)> build) {
      c.push_back({std::move(name), "operator", std::move(build)});
    };
    op("matmul", [](Rng& r) {
      Tensor a = Param(r, {3, 4}), b = Param(r, {4, 5});
      return Probe(r, [=] { return ag::MatMul(a, b); }, {a, b});
    });
    op("add_row_bias", [](Rng& r) {
      Tensor x = Param(r, {3, 5}), b = Param(r, {3});
      return Probe(r, [=] { return ag::AddRowBias(x, b); }, {x, b});
    });
    op("conv1d", [](Rng& r) {
      Tensor x = Param(r, {2, 17}), w = Param(r, {3, 2, 4});
      return Probe(r, [=] { return ag::Conv1d(x, w, 2, 2); }, {x, w});
    });
    op("depthwise_conv1d", [](Rng& r) {
      Tensor x = Param(r, {3, 12}), w = Param(r, {3, 3});
      return Probe(r, [=] { return ag::DepthwiseConv1d(x, w, 2); }, {x, w});
    });
    op("transposed_conv1d", [](Rng& r) {
      Tensor x = Param(r, {3, 6}), w = Param(r, {3, 2, 4});
      return Probe(r, [=] { return ag::TransposedConv1d(x, w, 2); }, {x, w});
    });
    op("add", [](Rng& r) {
      Tensor a = Param(r, {4, 3}), b = Param(r, {4, 3});
      return Probe(r, [=] { return ag::Add(a, b); }, {a, b});
    });
    op("sub", [](Rng& r) {
      Tensor a = Param(r, {4, 3}), b = Param(r, {4, 3});
      return Probe(r, [=] { return ag::Sub(a, b); }, {a, b});
    });
    op("mul", [](Rng& r) {
      Tensor a = Param(r, {4, 3}), b = Param(r, {4, 3});
      return Probe(r, [=] { return ag::Mul(a, b); }, {a, b});
    });
    op("scale", [](Rng& r) {
      Tensor a = Param(r, {6});
      return Probe(r, [=] { return ag::Scale(a, -1.7); }, {a});
    });
    op("add_const", [](Rng& r) {
      Tensor a = Param(r, {6});
      return Probe(r, [=] { return ag::AddConst(a, 0.3); }, {a});
    });
    op("scale_by_param", [](Rng& r) {
      Tensor a = Param(r, {3, 4}), s = Param(r, {1});
      return Probe(r, [=] { return ag::ScaleByParam(a, s); }, {a, s});
    });
    op("relu", [](Rng& r) {
      Tensor a = Param(r, {4, 5});
      return Probe(r, [=] { return ag::Relu(a); }, {a});
    });
    op("prelu", [](Rng& r) {
      Tensor a = Param(r, {4, 5}), s = Param(r, {1}, 0.1, 0.4);
      return Probe(r, [=] { return ag::Prelu(a, s); }, {a, s});
    });
    op("sigmoid", [](Rng& r) {
      Tensor a = Param(r, {4, 5}, -4.0, 4.0);
      return Probe(r, [=] { return ag::Sigmoid(a); }, {a});
    });
    op("feature_norm", [](Rng& r) {
      Tensor x = Param(r, {3, 7}), g = Param(r, {3}, 0.5, 1.5), b = Param(r, {3});
      return Probe(r, [=] { return ag::FeatureNorm(x, g, b); }, {x, g, b});
    });
    op("reduce_sum", [](Rng& r) {
      Tensor a = Param(r, {3, 4});
      return Probe(r, [=] { return ag::ReduceSum(a); }, {a});
    });
    op("log10", [](Rng& r) {
      Tensor a = Param(r, {6}, 0.5, 2.0);
      return Probe(r, [=] { return ag::Log10(a); }, {a});
    });
    op("concat", [](Rng& r) {
      Tensor a = Param(r, {2, 3}), b = Param(r, {4, 3});
      return Probe(r, [=] { return ag::Concat({a, b}, 0); }, {a, b});
    });
    op("slice", [](Rng& r) {
      Tensor a = Param(r, {3, 8});
      return Probe(r, [=] { return ag::Slice(a, 1, 2, 6); }, {a});
    });
    op("pad", [](Rng& r) {
      Tensor a = Param(r, {3, 4});
      return Probe(r, [=] { return ag::Pad(a, 1, 2, 3); }, {a});
    });
    op("transpose", [](Rng& r) {
      Tensor a = Param(r, {3, 5});
      return Probe(r, [=] { return ag::Transpose(a); }, {a});
    });
    op("reshape", [](Rng& r) {
      Tensor a = Param(r, {3, 4});
      return Probe(r, [=] { return ag::Reshape(a, {2, 6}); }, {a});
    });
    op("overlap_add", [](Rng& r) {
      Tensor a = Param(r, {5, 6});
      return Probe(r, [=] { return ag::OverlapAdd(a, 3); }, {a});
    });
    op("frame", [](Rng& r) {
      Tensor a = Param(r, {18});
      return Probe(r, [=] { return ag::Frame(a, 6, 3); }, {a});
    });
    op("stft_log_magnitude", [](Rng& r) {
      const FrameSpec spec = FrameSpec::FromWindowLength(16);
      Tensor x = Param(r, {60});
      CheckCase cc = Probe(r, [=] { return StftLogMagnitude(x, spec); }, {x});
      cc.fd_step = 1e-4;
      return cc;
    });
    op("masked_istft", [](Rng& r) {
      const FrameSpec spec = FrameSpec::FromWindowLength(16);
      const std::size_t len = 60;
      CoeffFrames x = Stft(RandomWave(r, len), spec);
      Tensor m = Param(r, {spec.NumBins(), x.frames}, 0.0, 1.0);
      auto coeffs = x.data;
      return Probe(r, [=] { return MaskedIstft(m, coeffs, spec, len); }, {m});
    });
    op("learned_encode", [](Rng& r) {
      const FrameSpec spec = FrameSpec::FromWindowLength(8);
      Tensor x = Param(r, {40}), w = Param(r, {5, 1, 8});
      return Probe(r, [=] { return LearnedEncode(x, w, spec); }, {x, w});
    });
    op("learned_decode", [](Rng& r) {
      const FrameSpec spec = FrameSpec::FromWindowLength(8);
      const std::size_t len = 40;
      Tensor c = Param(r, {5, spec.FrameCount(len)}), w = Param(r, {5, 1, 8});
      return Probe(r, [=] { return LearnedDecode(c, w, spec, len); }, {c, w});
    });
    op("mixture_consistency", [](Rng& r) {
      Tensor a = Param(r, {10}), b = Param(r, {10}), m = Param(r, {10});
      return Probe(r, [=] { return ag::Concat(MixtureConsistency({a, b}, m), 0); }, {a, b, m});
    });
    op("neg_snr", [](Rng& r) {
      Waveform ref = RandomWave(r, 20);
      Tensor e = Param(r, {20});
      return CheckCase{[=] { return NegSnrLossTensor(ref, e); }, {e}};
    });
    c.push_back({"tdcn_forward", "network", [](Rng& r) {
      TdcnConfig c = TinyGradCheckConfig(BasisKind::kLearned);
      auto params = std::make_shared<TdcnParams>(TdcnInit(c, c.n_basis, r.NextU64()));
      Tensor f = Param(r, {c.n_basis, 12});
      std::vector<Tensor> all = params->Parameters();
      all.push_back(f);
      return Probe(r, [=] { return ag::Concat(TdcnForward(*params, c, f), 0); }, all);
    }});
    c.push_back({"end_to_end_stft", "end-to-end", [](Rng& r) { return EndToEnd(r, BasisKind::kStft, false); }});
    c.push_back({"end_to_end_learned", "end-to-end",
                 [](Rng& r) { return EndToEnd(r, BasisKind::kLearned, false); }});
    c.push_back({"end_to_end_itdcn_stft", "end-to-end",
                 [](Rng& r) { return EndToEnd(r, BasisKind::kStft, true); }});
    c.push_back({"end_to_end_itdcn_learned", "end-to-end",
                 [](Rng& r) { return EndToEnd(r, BasisKind::kLearned, true); }});
    return c;
  }();
  return checks;
}

}  // namespace

std::vector<std::string> RegisteredGradChecks() {
  std::vector<std::string> names;
  for (const auto& c : Registry()) names.push_back(c.name);
  return names;
}

std::vector<GradCheckEntry> RunGradCheckSuite(std::optional<double> threshold, std::uint64_t seed) {
  std::vector<GradCheckEntry> out;
  std::uint64_t index = 0;
  for (const auto& check : Registry()) {
    Rng rng = Rng::Derive(seed, index++);
    CheckCase cc = check.build(rng);
    ag::GradCheckOptions opts;
    opts.seed = rng.NextU64();
    opts.fd_step = cc.fd_step;
    ag::GradCheckResult res = ag::GradCheck(cc.loss, cc.params, opts);
    GradCheckEntry e;
    e.name = check.name;
    e.kind = check.kind;
    e.worst_relative_error = res.max_relative_error;
    e.probes = res.probes;
    e.skipped = res.skipped_kink_probes;
    e.threshold = threshold.value_or(check.kind == "operator" ? kOperatorGradTolerance
                                                              : kEndToEndGradTolerance);
    e.passed = res.probes > 0 && res.max_relative_error < e.threshold;
    out.push_back(e);
  }
  return out;
}

void WriteGradCheckCsv(const std::vector<GradCheckEntry>& entries, const std::string& path) {
  auto out = OpenForWrite(path);
  out << "name,kind,worst_relative_error,probes,skipped_kink_probes,threshold,passed\n";
  for (const auto& e : entries) {
    out << e.name << ',' << e.kind << ','
        << FormatDouble(e.worst_relative_error) << ',' << e.probes << ',' << e.skipped << ','
        << FormatDouble(e.threshold) << ',' << (e.passed ? 1 : 0) << '\n';
  }
}

}  // namespace unisep
