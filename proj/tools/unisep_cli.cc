// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// unisep: dataset generation, training, separation, evaluation, oracle
// bounds, window sweeps and gradient checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unisep/datagen.h"
#include "unisep/error.h"
#include "unisep/harness.h"
#include "unisep/separator.h"
#include "unisep/wav.h"

namespace fs = std::filesystem;
using namespace unisep;

namespace {

struct MixgenArgs {
  std::string out;
  bool synthetic = false;
  std::string preset = "disjoint";
  std::size_t n_files = 40;
  std::uint64_t corpus_seed = 1;
  std::string corpus;
  std::string exclude;
  std::size_t k = 2;
  std::size_t n_train = 0;
  std::optional<std::size_t> n_val, n_test;
  std::uint64_t seed = 1;
  double clip_s = kClipLengthS;
  double gain_db = 0.0;
  std::string distinct_groups = "auto";
};

std::vector<std::string> ReadLines(const std::string& path) {
  std::istringstream in(ReadFileBytes(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

int RunMixgen(const MixgenArgs& a) {
  UNISEP_CHECK(a.synthetic != !a.corpus.empty(), ErrorCode::kInvalidArgument,
               "give exactly one of --synthetic or --corpus");
  UNISEP_CHECK(a.n_train >= 1, ErrorCode::kInvalidArgument, "--n-train must be >= 1");
  Corpus corpus;
  std::size_t groups = 0;
  if (a.synthetic) {
    SyntheticCorpusOptions co;
    co.preset = ParseSyntheticPreset(a.preset);
    co.n_files = a.n_files;
    co.seed = a.corpus_seed;
    corpus = MakeSyntheticCorpus(co);
    corpus.WriteTo((fs::path(a.out) / "corpus").string());
  } else {
    std::vector<std::string> excluded;
    if (!a.exclude.empty()) excluded = ReadLines(a.exclude);
    corpus = Corpus::FromDirectory(a.corpus, excluded);
  }
  {
    std::vector<std::string> names;
    for (const auto& f : corpus.files())
      if (std::find(names.begin(), names.end(), f.group) == names.end()) names.push_back(f.group);
    groups = names.size();
  }

  ManifestOptions mo;
  mo.sources = a.k;
  mo.n_train = a.n_train;
  // Validation and test mixture counts follow the 70/20/10 file split.
  mo.n_validation = a.n_val.value_or(static_cast<std::size_t>(std::llround(a.n_train * 20.0 / 70.0)));
  mo.n_test = a.n_test.value_or(static_cast<std::size_t>(std::llround(a.n_train * 10.0 / 70.0)));
  mo.seed = a.seed;
  mo.clip_len_s = a.clip_s;
  mo.gain_db_range = a.gain_db;
  if (a.distinct_groups == "auto") {
    mo.distinct_groups = a.synthetic && groups >= a.k && groups > 1;
  } else {
    UNISEP_CHECK(a.distinct_groups == "on" || a.distinct_groups == "off",
                 ErrorCode::kInvalidArgument, "--distinct-groups must be auto, on or off");
    mo.distinct_groups = a.distinct_groups == "on";
  }

  DatasetManifest manifest = BuildManifest(corpus.files(), mo);
  fs::create_directories(a.out);
  const std::string manifest_path = (fs::path(a.out) / "manifest.jsonl").string();
  WriteManifest(manifest, manifest_path);
  for (const auto& r : manifest.recipes)
    WriteExample(RenderMixture(r, corpus, manifest.clip_len_s),
                 (fs::path(a.out) / r.output_path).string());

  std::cout << "files: train " << manifest.FileCount(Split::kTrain) << ", val "
            << manifest.FileCount(Split::kValidation) << ", test "
            << manifest.FileCount(Split::kTest) << "\n"
            << "mixtures: train " << manifest.MixtureCount(Split::kTrain) << ", val "
            << manifest.MixtureCount(Split::kValidation) << ", test "
            << manifest.MixtureCount(Split::kTest) << "\n"
            << "manifest: " << manifest_path << "\n"
            << "checksum: " << ChecksumHex(ReadFileBytes(manifest_path)) << "\n";
  return 0;
}

// Model and training flags shared by train and sweep; unset flags keep the
// config-file (or default) value.
struct ModelFlags {
  std::string config;
  std::optional<std::string> basis;
  std::optional<double> window_ms;
  bool iterative = false;
  std::optional<std::size_t> n_basis, bottleneck, conv_channels, skip_channels, kernel,
      blocks, repeats, steps, batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, crop_s;
  bool no_feature_norm = false;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "Experiment config file (INI)");
    app->add_option("--basis", basis, "stft or learned");
    app->add_option("--window-ms", window_ms, "Basis window in ms (hop = window / 2)");
    app->add_flag("--iterative", iterative, "Two-stage iTDCN++");
    app->add_option("--n-basis", n_basis, "Learned basis size N");
    app->add_option("--bottleneck", bottleneck, "Bottleneck channels B");
    app->add_option("--conv-channels", conv_channels, "Block channels H");
    app->add_option("--skip-channels", skip_channels, "Skip channels Sc");
    app->add_option("--kernel", kernel, "Depthwise kernel taps P");
    app->add_option("--blocks", blocks, "Blocks per repeat X");
    app->add_option("--repeats", repeats, "Repeats R");
    app->add_flag("--no-feature-norm", no_feature_norm, "Disable feature-wise normalization");
    app->add_option("--steps", steps, "Training steps");
    app->add_option("--batch-size", batch_size, "Mixtures per step");
    app->add_option("--seed", seed, "Training seed");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--crop-s", crop_s, "Training crop length in s (0 = whole mixtures)");
  }

  ExperimentConfig Resolve() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig{} : LoadExperimentConfig(config);
    if (basis) c.basis_kind = ParseBasisKind(*basis);
    if (window_ms) c.window_ms = *window_ms;
    if (iterative) c.iterative = true;
    if (n_basis) c.n_basis = *n_basis;
    if (bottleneck) c.bottleneck = *bottleneck;
    if (conv_channels) c.conv_channels = *conv_channels;
    if (skip_channels) c.skip_channels = *skip_channels;
    if (kernel) c.kernel = *kernel;
    if (blocks) c.blocks_per_repeat = *blocks;
    if (repeats) c.repeats = *repeats;
    if (no_feature_norm) c.feature_norm = false;
    if (steps) c.steps = *steps;
    if (batch_size) c.batch_size = *batch_size;
    if (seed) c.seed = *seed;
    if (lr) c.learning_rate = *lr;
    if (crop_s) c.crop_s = *crop_s;
    ValidateExperimentConfig(c);
    return c;
  }
};

void CheckSources(const std::vector<MixtureExample>& examples, std::size_t sources) {
  UNISEP_CHECK(!examples.empty(), ErrorCode::kInvalidArgument, "dataset split is empty");
  UNISEP_CHECK(examples[0].references.size() == sources, ErrorCode::kShapeMismatch,
               "dataset has " + std::to_string(examples[0].references.size()) +
                   " sources per mixture, config expects " + std::to_string(sources));
}

int RunTrain(const ModelFlags& flags, const std::string& data, const std::string& out,
             std::size_t log_every, std::size_t checkpoint_every) {
  ExperimentConfig cfg = flags.Resolve();
  cfg.manifest_path = (fs::path(data) / "manifest.jsonl").string();
  cfg.output_dir = out;
  auto train = LoadSplit(data, Split::kTrain);
  const DatasetManifest manifest = ReadManifest(cfg.manifest_path);
  cfg.sources = manifest.sources;
  CheckSources(train, cfg.sources);
  cfg.sample_rate_hz = train[0].mixture.sample_rate_hz;
  ValidateExperimentConfig(cfg);
  fs::create_directories(out);
  SaveExperimentConfig(cfg, (fs::path(out) / "config.ini").string());

  SeparationModel model = InitModel(ModelConfigFor(cfg), cfg.iterative, cfg.seed);
  std::vector<TrainLogRow> log;
  TrainModel(model, train, TrainOptionsFor(cfg), &log, [&](const TrainLogRow& row) {
    if (log_every && (row.step % log_every == 0 || row.step == 1))
      std::cout << "step " << row.step << " loss " << FormatDouble(row.loss) << " ("
                << FormatDouble(std::round(row.wall_s * 10.0) / 10.0) << " s)" << std::endl;
    if (checkpoint_every && row.step % checkpoint_every == 0)
      SaveModel(model, (fs::path(out) / ("model_step" + std::to_string(row.step) + ".ckpt")).string());
  });
  SaveModel(model, (fs::path(out) / "model.ckpt").string());
  WriteTrainLogCsv(log, (fs::path(out) / "train_log.csv").string());
  std::cout << "checkpoint: " << (fs::path(out) / "model.ckpt").string() << "\n";
  return 0;
}

void WriteEstimates(const std::vector<Waveform>& estimates, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < estimates.size(); ++k)
    WriteWav(estimates[k], (dir / ("estimate" + std::to_string(k) + ".wav")).string(),
             WavEncoding::kFloat32);
}

int RunSeparate(const std::string& model_path, const std::string& input, const std::string& data,
                const std::string& split_name, const std::string& out) {
  UNISEP_CHECK(input.empty() != data.empty(), ErrorCode::kInvalidArgument,
               "give exactly one of --input or --data");
  SeparationModel model = LoadModel(model_path);
  if (!input.empty()) {
    WriteEstimates(Separate(model, ReadWav(input)), out);
    std::cout << "wrote " << model.config.sources << " estimates to " << out << "\n";
    return 0;
  }
  const Split split = ParseSplit(split_name);
  const DatasetManifest manifest = ReadManifest((fs::path(data) / "manifest.jsonl").string());
  UNISEP_CHECK(manifest.sources == model.config.sources, ErrorCode::kShapeMismatch,
               "model separates " + std::to_string(model.config.sources) +
                   " sources, dataset has " + std::to_string(manifest.sources));
  std::size_t count = 0;
  for (const auto* r : manifest.RecipesFor(split)) {
    Waveform mix = ReadWav((fs::path(data) / r->output_path / "mixture.wav").string());
    WriteEstimates(Separate(model, mix), fs::path(out) / r->output_path);
    ++count;
  }
  std::cout << "separated " << count << " mixtures into " << out << "\n";
  return 0;
}

void PrintReport(const EvalReport& report) {
  std::cout << "rows " << report.rows.size() << ", counted " << report.counted << ", excluded "
            << report.excluded << "\n"
            << "mean SI-SDRi " << FormatDouble(report.mean_si_sdri) << " dB, median "
            << FormatDouble(report.median_si_sdri) << " dB\n";
}

void SaveReport(const EvalReport& report, const fs::path& out) {
  WriteReportCsv(report, (out / "report.csv").string());
  WriteSummaryCsv(report, (out / "summary.csv").string());
}

int RunEvaluate(const std::string& data, const std::string& split_name,
                const std::string& model_path, const std::string& estimates_dir,
                const std::string& out) {
  UNISEP_CHECK(model_path.empty() != estimates_dir.empty(), ErrorCode::kInvalidArgument,
               "give exactly one of --model or --estimates");
  const Split split = ParseSplit(split_name);
  auto examples = LoadSplit(data, split);
  EvalReport report;
  if (!model_path.empty()) {
    SeparationModel model = LoadModel(model_path);
    CheckSources(examples, model.config.sources);
    report = EvaluateModel(model, examples);
  } else {
    const DatasetManifest manifest = ReadManifest((fs::path(data) / "manifest.jsonl").string());
    const auto recipes = manifest.RecipesFor(split);
    std::vector<std::vector<Waveform>> estimates;
    for (std::size_t i = 0; i < recipes.size(); ++i) {
      std::vector<Waveform> est;
      for (std::size_t k = 0; k < manifest.sources; ++k)
        est.push_back(ReadWav((fs::path(estimates_dir) / recipes[i]->output_path /
                               ("estimate" + std::to_string(k) + ".wav"))
                                  .string()));
      estimates.push_back(std::move(est));
    }
    report = Evaluate(examples, estimates);
    report.settings = {{"system", "estimates"}, {"estimates", estimates_dir}};
  }
  report.settings.emplace_back("split", SplitName(split));
  SaveReport(report, out);
  PrintReport(report);
  return 0;
}

int RunOracleEval(const std::string& data, const std::string& split_name,
                  std::vector<double> windows, const std::string& out) {
  if (windows.empty()) windows = {10.0};
  auto examples = LoadSplit(data, ParseSplit(split_name));
  auto rows = OracleSweep(examples, windows, out);
  WriteSweepCsv(rows, (fs::path(out) / "windows.csv").string());
  bool failed = false;
  for (const auto& r : rows) {
    std::cout << "window " << FormatDouble(r.window_ms) << " ms: mean SI-SDRi "
              << FormatDouble(r.mean_si_sdri) << " dB (" << r.status << ")\n";
    failed |= r.status != "ok";
  }
  return failed ? 1 : 0;
}

int RunSweep(const std::string& data, const std::string& split_name, const std::string& mode,
             std::vector<double> windows, const ModelFlags& flags, const std::string& out) {
  if (windows.empty()) windows.assign(std::begin(kStandardWindowsMs), std::end(kStandardWindowsMs));
  auto test = LoadSplit(data, ParseSplit(split_name));
  std::vector<SweepRow> rows;
  if (mode == "oracle") {
    rows = OracleSweep(test, windows, out);
  } else if (mode == "train") {
    ExperimentConfig base = flags.Resolve();
    base.manifest_path = (fs::path(data) / "manifest.jsonl").string();
    base.output_dir = out;
    auto train = LoadSplit(data, Split::kTrain);
    base.sources = train.empty() ? base.sources : train[0].references.size();
    rows = TrainSweep(base, train, test, windows, out);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--mode must be oracle or train");
  }
  WriteSweepCsv(rows, (fs::path(out) / "sweep.csv").string());
  {
    std::ofstream plot(fs::path(out) / "sweep_plot.csv");
    plot << "window_ms,mean_si_sdri\n";
    for (const auto& r : rows)
      plot << FormatDouble(r.window_ms) << ',' << FormatDouble(r.mean_si_sdri) << '\n';
  }
  bool failed = false;
  for (const auto& r : rows) {
    std::cout << "window " << FormatDouble(r.window_ms) << " ms: mean SI-SDRi "
              << FormatDouble(r.mean_si_sdri) << " dB (" << r.status << ")\n";
    failed |= r.status != "ok";
  }
  return failed ? 1 : 0;
}

int RunGradCheck(std::optional<double> threshold, std::uint64_t seed, const std::string& out) {
  auto entries = RunGradCheckSuite(threshold, seed);
  bool ok = true;
  std::printf("%-28s %-10s %12s %7s %7s %9s  %s\n", "check", "kind", "worst_rel", "probes",
              "skipped", "threshold", "result");
  for (const auto& e : entries) {
    std::printf("%-28s %-10s %12.3e %7zu %7zu %9.1e  %s\n", e.name.c_str(), e.kind.c_str(),
                e.worst_relative_error, e.probes, e.skipped, e.threshold,
                e.passed ? "pass" : "FAIL");
    ok &= e.passed;
  }
  if (!out.empty()) WriteGradCheckCsv(entries, out);
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unisep: single-channel sound separation with TDCN++ masking networks"};
  app.require_subcommand(1);

  MixgenArgs mg;
  auto* mixgen = app.add_subcommand("mixgen", "Build a mixture manifest and render its WAV tree");
  mixgen->add_option("--out", mg.out, "Output dataset directory")->required();
  mixgen->add_flag("--synthetic", mg.synthetic, "Use the built-in synthetic corpus");
  mixgen->add_option("--preset", mg.preset, "Synthetic corpus: disjoint, tonal or mixed");
  mixgen->add_option("--n-files", mg.n_files, "Synthetic corpus size");
  mixgen->add_option("--corpus-seed", mg.corpus_seed, "Synthetic corpus seed");
  mixgen->add_option("--corpus", mg.corpus, "Directory of source WAV files");
  mixgen->add_option("--exclude", mg.exclude, "File listing corpus ids to leave out");
  mixgen->add_option("--k", mg.k, "Sources per mixture");
  mixgen->add_option("--n-train", mg.n_train, "Training mixtures")->required();
  mixgen->add_option("--n-val", mg.n_val, "Validation mixtures (default: scaled from n-train)");
  mixgen->add_option("--n-test", mg.n_test, "Test mixtures (default: scaled from n-train)");
  mixgen->add_option("--seed", mg.seed, "Manifest seed");
  mixgen->add_option("--clip-s", mg.clip_s, "Clip length in seconds");
  mixgen->add_option("--gain-db", mg.gain_db, "Random per-source gain range in dB (0 = off)");
  mixgen->add_option("--distinct-groups", mg.distinct_groups,
                     "Take each mixture's sources from different groups: auto, on or off");

  ModelFlags train_flags;
  std::string train_data, train_out;
  std::size_t log_every = 100, checkpoint_every = 0;
  auto* train = app.add_subcommand("train", "Train a separation model");
  train->add_option("--data", train_data, "Dataset directory from mixgen")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--log-every", log_every, "Print the loss every N steps (0 = never)");
  train->add_option("--checkpoint-every", checkpoint_every, "Extra checkpoint every N steps");
  train_flags.Register(train);

  std::string sep_model, sep_input, sep_data, sep_split = "test", sep_out;
  auto* separate = app.add_subcommand("separate", "Write estimate WAVs for mixtures");
  separate->add_option("--model", sep_model, "Checkpoint")->required();
  separate->add_option("--input", sep_input, "Single mixture WAV");
  separate->add_option("--data", sep_data, "Dataset directory");
  separate->add_option("--split", sep_split, "Dataset split");
  separate->add_option("--out", sep_out, "Output directory")->required();

  std::string ev_data, ev_split = "test", ev_model, ev_estimates, ev_out;
  auto* evaluate = app.add_subcommand("evaluate", "PIT-aligned SI-SDRi report");
  evaluate->add_option("--data", ev_data, "Dataset directory")->required();
  evaluate->add_option("--split", ev_split, "Dataset split");
  evaluate->add_option("--model", ev_model, "Checkpoint to run");
  evaluate->add_option("--estimates", ev_estimates, "Directory written by separate --data");
  evaluate->add_option("--out", ev_out, "Report directory")->required();

  std::string or_data, or_split = "test", or_out;
  std::vector<double> or_windows;
  auto* oracle = app.add_subcommand("oracle-eval", "Oracle binary mask upper bound");
  oracle->add_option("--data", or_data, "Dataset directory")->required();
  oracle->add_option("--split", or_split, "Dataset split");
  oracle->add_option("--window-ms", or_windows, "Window(s) in ms (default 10)")->delimiter(',');
  oracle->add_option("--out", or_out, "Report directory")->required();

  ModelFlags sweep_flags;
  std::string sw_data, sw_split = "test", sw_mode = "oracle", sw_out;
  std::vector<double> sw_windows;
  auto* sweep = app.add_subcommand("sweep", "Mean SI-SDRi as a function of window size");
  sweep->add_option("--data", sw_data, "Dataset directory")->required();
  sweep->add_option("--split", sw_split, "Evaluation split");
  sweep->add_option("--mode", sw_mode, "oracle or train");
  sweep->add_option("--windows", sw_windows, "Windows in ms (default 2.5,5,10,25,50)")->delimiter(',');
  sweep->add_option("--out", sw_out, "Output directory")->required();
  sweep_flags.Register(sweep);

  std::optional<double> gc_threshold;
  std::uint64_t gc_seed = 1;
  std::string gc_out;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of every operator");
  grad->add_option("--threshold", gc_threshold, "Override the relative-error tolerances");
  grad->add_option("--seed", gc_seed, "Seed for inputs and probe directions");
  grad->add_option("--out", gc_out, "CSV report path");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*mixgen) return RunMixgen(mg);
    if (*train) return RunTrain(train_flags, train_data, train_out, log_every, checkpoint_every);
    if (*separate) return RunSeparate(sep_model, sep_input, sep_data, sep_split, sep_out);
    if (*evaluate) return RunEvaluate(ev_data, ev_split, ev_model, ev_estimates, ev_out);
    if (*oracle) return RunOracleEval(or_data, or_split, or_windows, or_out);
    if (*sweep) return RunSweep(sw_data, sw_split, sw_mode, sw_windows, sweep_flags, sw_out);
    if (*grad) return RunGradCheck(gc_threshold, gc_seed, gc_out);
  } catch (const std::exception& e) {
    std::cerr << "unisep " << name << ": " << e.what() << "\n";
    return 2;
  }
  return 2;
}
