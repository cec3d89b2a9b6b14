// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Runs the built unisep executable end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "unisep/datagen.h"
#include "unisep/harness.h"

namespace unisep {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun Cli(const testing::TempDir& dir, const std::string& args) {
  const std::string out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(UNISEP_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::ReadAll(out);
  r.err = testing::ReadAll(err);
  return r;
}

std::size_t CountDirs(const std::string& path) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(path)) n += e.is_directory();
  return n;
}

std::size_t CountLines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

std::string Checksum(const std::string& out) {
  const auto pos = out.find("checksum: ");
  return pos == std::string::npos ? "" : out.substr(pos + 10, 16);
}

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir_{"cli"};
};

TEST_F(CliTest, MixgenCountsAndDeterminism) {
  const CliRun a = Cli(dir_, "mixgen --synthetic --k 2 --n-train 50 --seed 7 --out " + (dir_ / "a"));
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("mixtures: train 50, val 14, test 7"), std::string::npos) << a.out;
  EXPECT_EQ(CountDirs(dir_ / "a/train"), 50u);
  EXPECT_EQ(CountDirs(dir_ / "a/val"), 14u);
  EXPECT_EQ(CountDirs(dir_ / "a/test"), 7u);
  const CliRun b = Cli(dir_, "mixgen --synthetic --k 2 --n-train 50 --seed 7 --out " + (dir_ / "b"));
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_FALSE(Checksum(a.out).empty());
  EXPECT_EQ(Checksum(a.out), Checksum(b.out));
  EXPECT_EQ(testing::ReadAll(dir_ / "a/manifest.jsonl"), testing::ReadAll(dir_ / "b/manifest.jsonl"));
  EXPECT_EQ(testing::ReadAll(dir_ / "a/test/test-00003/mixture.wav"),
            testing::ReadAll(dir_ / "b/test/test-00003/mixture.wav"));
  const CliRun c = Cli(dir_, "mixgen --synthetic --k 2 --n-train 50 --seed 8 --out " + (dir_ / "c"));
  EXPECT_NE(Checksum(a.out), Checksum(c.out));
}

TEST_F(CliTest, ThreeSourceRecipesUseDistinctFiles) {
  const CliRun r = Cli(dir_, "mixgen --synthetic --preset mixed --k 3 --n-train 12 --seed 2 --out " +
                              (dir_ / "d"));
  ASSERT_EQ(r.code, 0) << r.err;
  const DatasetManifest m = ReadManifest(dir_ / "d/manifest.jsonl");
  EXPECT_EQ(m.sources, 3u);
  for (const auto& recipe : m.recipes) {
    std::set<std::string> files;
    for (const auto& s : recipe.sources) files.insert(s.file);
    EXPECT_EQ(files.size(), 3u) << recipe.id;
  }
  EXPECT_TRUE(fs::exists(dir_ / "d/train/train-00000/source2.wav"));
}

TEST_F(CliTest, ErrorsExitNonZeroWithDiagnostics) {
  const CliRun missing_flag = Cli(dir_, "mixgen --synthetic --n-train 5");
  EXPECT_NE(missing_flag.code, 0);
  EXPECT_FALSE(missing_flag.err.empty());
  const CliRun bad_corpus = Cli(dir_, "mixgen --corpus " + (dir_ / "nope") + " --n-train 5 --out " + (dir_ / "x"));
  EXPECT_EQ(bad_corpus.code, 2);
  EXPECT_NE(bad_corpus.err.find("unisep mixgen:"), std::string::npos) << bad_corpus.err;
  const CliRun bad_data = Cli(dir_, "oracle-eval --data " + (dir_ / "nope") + " --out " + (dir_ / "y"));
  EXPECT_EQ(bad_data.code, 2);
  const CliRun bad_window = Cli(dir_, "mixgen --synthetic --n-train 3 --out " + (dir_ / "w") +
                                       " && true; " UNISEP_CLI_PATH " train --data " + (dir_ / "w") +
                                       " --window-ms 7 --steps 1 --out " + (dir_ / "wm"));
  EXPECT_EQ(bad_window.code, 2);
  EXPECT_EQ(Cli(dir_, "frobnicate").code != 0, true);
}

TEST_F(CliTest, GradCheckExitCodes) {
  const CliRun ok = Cli(dir_, "grad-check --out " + (dir_ / "gc.csv"));
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  const std::string csv = testing::ReadAll(dir_ / "gc.csv");
  for (const auto& name : RegisteredGradChecks()) {
    std::size_t count = 0;
    for (std::size_t pos = csv.find("\n" + name + ","); pos != std::string::npos;
         pos = csv.find("\n" + name + ",", pos + 1)) {
      ++count;
    }
    EXPECT_EQ(count, 1u) << name;
  }
  EXPECT_EQ(Cli(dir_, "grad-check --threshold 1e-12").code, 1);
}

TEST_F(CliTest, TrainSeparateEvaluate) {
  ASSERT_EQ(Cli(dir_, "mixgen --synthetic --n-files 16 --n-train 6 --n-val 1 --n-test 3 --clip-s 1 --out " +
                          (dir_ / "data")).code, 0);
  const std::string tiny =
      " --basis stft --window-ms 5 --bottleneck 4 --conv-channels 8 --skip-channels 4 --blocks 2 "
      "--repeats 1 --steps 3 --crop-s 0.1";
  const CliRun train = Cli(dir_, "train --data " + (dir_ / "data") + tiny + " --out " + (dir_ / "model"));
  ASSERT_EQ(train.code, 0) << train.err;
  for (const char* f : {"config.ini", "model.ckpt", "train_log.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / (std::string("model/") + f))) << f;
  }
  EXPECT_EQ(CountLines(testing::ReadAll(dir_ / "model/train_log.csv")), 4u);
  const ExperimentConfig cfg = LoadExperimentConfig(dir_ / "model/config.ini");
  EXPECT_EQ(cfg.steps, 3u);
  EXPECT_EQ(cfg.bottleneck, 4u);

  const CliRun sep = Cli(dir_, "separate --model " + (dir_ / "model/model.ckpt") + " --data " +
                                (dir_ / "data") + " --split test --out " + (dir_ / "est"));
  ASSERT_EQ(sep.code, 0) << sep.err;
  EXPECT_TRUE(fs::exists(dir_ / "est/test/test-00000/estimate1.wav"));

  const CliRun single = Cli(dir_, "separate --model " + (dir_ / "model/model.ckpt") + " --input " +
                                   (dir_ / "data/test/test-00001/mixture.wav") + " --out " + (dir_ / "one"));
  ASSERT_EQ(single.code, 0) << single.err;
  EXPECT_TRUE(fs::exists(dir_ / "one/estimate0.wav"));

  const CliRun ev1 = Cli(dir_, "evaluate --data " + (dir_ / "data") + " --split test --estimates " +
                                (dir_ / "est") + " --out " + (dir_ / "ev1"));
  ASSERT_EQ(ev1.code, 0) << ev1.err;
  const CliRun ev2 = Cli(dir_, "evaluate --data " + (dir_ / "data") + " --split test --model " +
                                (dir_ / "model/model.ckpt") + " --out " + (dir_ / "ev2"));
  ASSERT_EQ(ev2.code, 0) << ev2.err;
  const EvalReport a = ReadReportCsv(dir_ / "ev1/report.csv");
  const EvalReport b = ReadReportCsv(dir_ / "ev2/report.csv");
  ASSERT_EQ(a.rows.size(), 6u);
  ASSERT_EQ(b.rows.size(), 6u);
  // Estimates went through float32 WAV files on one path only.
  EXPECT_NEAR(a.mean_si_sdri, b.mean_si_sdri, 1e-3);
  const CliRun ev3 = Cli(dir_, "evaluate --data " + (dir_ / "data") + " --split test --model " +
                                (dir_ / "model/model.ckpt") + " --out " + (dir_ / "ev3"));
  EXPECT_EQ(ChecksumHex(testing::ReadAll(dir_ / "ev2/report.csv")),
            ChecksumHex(testing::ReadAll(dir_ / "ev3/report.csv")));
  EXPECT_TRUE(fs::exists(dir_ / "ev2/summary.csv"));
}

TEST_F(CliTest, OracleEvalAndSweep) {
  ASSERT_EQ(Cli(dir_, "mixgen --synthetic --preset tonal --n-files 12 --n-train 4 --n-val 1 --n-test 3 "
                      "--clip-s 1 --out " + (dir_ / "data")).code, 0);
  const CliRun oracle = Cli(dir_, "oracle-eval --data " + (dir_ / "data") +
                                   " --split test --window-ms 10,25 --out " + (dir_ / "oracle"));
  ASSERT_EQ(oracle.code, 0) << oracle.err;
  EXPECT_EQ(CountLines(testing::ReadAll(dir_ / "oracle/windows.csv")), 3u);
  EXPECT_TRUE(fs::exists(dir_ / ("oracle/" + WindowDirName(25.0) + "/report.csv")));
  const CliRun sweep = Cli(dir_, "sweep --data " + (dir_ / "data") + " --split test --mode oracle --out " +
                                  (dir_ / "sweep"));
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  const auto rows = ReadSweepCsv(dir_ / "sweep/sweep.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].window_ms, kStandardWindowsMs[i]);
  EXPECT_TRUE(fs::exists(dir_ / "sweep/sweep_plot.csv"));
}

}  // namespace
}  // namespace unisep
