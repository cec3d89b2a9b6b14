// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Reproducible mixture-dataset construction: event detection on source
// files, clip extraction around events (or looping of short files), K-way
// mixing of clips from distinct files, and a 70/20/10 partition by file.
// Every random draw is made while building the manifest and written into
// it, so rendering is a pure function of (recipe, corpus).

#ifndef UNISEP_DATAGEN_H_
#define UNISEP_DATAGEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unisep/signal.h"

namespace unisep {

struct EventList {
  std::string source_file;
  std::vector<std::size_t> event_times;  // sample indices, strictly increasing
  bool silent = false;
};

struct EventDetectorOptions {
  double rms_window_s = 0.05;  // hop is half the window
  // A window counts as "below average" only under (1 - hysteresis) times
  // the file-wide mean RMS, so ripple on a steady sound is not an onset.
  double hysteresis = 0.1;
};

// Onsets are window starts where the local RMS rises from below to at or
// above the file-wide mean RMS. Files with no such rise get a single event
// at 0; all-zero files are additionally flagged silent.
EventList DetectEvents(const Waveform& waveform, const EventDetectorOptions& options = {});

struct ClipDraw {
  double offset_s = 0.0;             // added to the event time
  std::optional<double> loop_gap_s;  // set only for files shorter than a clip
};

constexpr double kClipLengthS = 3.0;
constexpr double kMaxEventOffsetS = 0.5;
constexpr double kMaxLoopGapS = 1.0;

// Draws the random parts of a clip for a file of `file_len` samples.
ClipDraw DrawClip(std::size_t file_len, int sample_rate_hz, double clip_len_s, Rng& rng);

// Files at least one clip long: the clip is centered on event + offset and
// zero-padded past the file bounds. Shorter files are tiled with
// loop_gap_s of silence between repetitions and cut to length.
Waveform ExtractClip(const Waveform& waveform, std::size_t event_time,
                     const ClipDraw& draw, double clip_len_s = kClipLengthS);

// Draws then extracts; `draw_out` receives the draw when non-null.
Waveform ExtractClip(const Waveform& waveform, std::size_t event_time, Rng& rng,
                     double clip_len_s = kClipLengthS, ClipDraw* draw_out = nullptr);

// ---- Corpus -----------------------------------------------------------------

struct CorpusFile {
  std::string id;
  std::string group;  // optional class label, "" when unused
  std::size_t length = 0;
  int sample_rate_hz = kDefaultSampleRate;
  std::vector<std::size_t> events;
};

// A set of source files addressed by id, either WAV files under a root
// directory (id = relative path, group = first path component when nested)
// or in-memory waveforms.
class Corpus {
 public:
  static Corpus FromDirectory(const std::string& root,
                              const std::vector<std::string>& excluded_ids = {},
                              const EventDetectorOptions& detector = {});
  static Corpus InMemory(std::vector<std::pair<CorpusFile, Waveform>> files,
                         const EventDetectorOptions& detector = {});

  const std::vector<CorpusFile>& files() const { return files_; }
  const CorpusFile& file(const std::string& id) const;
  Waveform Load(const std::string& id) const;
  // Writes every file as float32 WAV under root/<id>.
  void WriteTo(const std::string& root) const;

 private:
  std::string root_;
  std::vector<CorpusFile> files_;
  std::map<std::string, Waveform> memory_;
  std::map<std::string, std::size_t> index_;
};

enum class SyntheticPreset {
  kDisjoint,  // "tonal" (tone/chirp, 200-1500 Hz) vs "noise" (band noise, 3-6 kHz)
  kTonal,     // tones and chirps only, 200-2000 Hz
  kMixed,     // all synthetic kinds
};

SyntheticPreset ParseSyntheticPreset(const std::string& name);
const char* SyntheticPresetName(SyntheticPreset preset);

struct SyntheticCorpusOptions {
  SyntheticPreset preset = SyntheticPreset::kDisjoint;
  std::size_t n_files = 40;
  std::uint64_t seed = 1;
  int sample_rate_hz = kDefaultSampleRate;
  double min_duration_s = 1.0;
  double max_duration_s = 10.0;
};

Corpus MakeSyntheticCorpus(const SyntheticCorpusOptions& options,
                           const EventDetectorOptions& detector = {});

// ---- Manifest ---------------------------------------------------------------

enum class Split { kTrain, kValidation, kTest };
const char* SplitName(Split split);
Split ParseSplit(const std::string& name);

struct SourceDraw {
  std::string file;
  std::size_t event = 0;
  double offset_s = 0.0;
  std::optional<double> loop_gap_s;
  double gain_db = 0.0;
};

struct MixtureRecipe {
  std::string id;
  Split split = Split::kTrain;
  std::vector<SourceDraw> sources;
  std::uint64_t seed = 0;
  std::string output_path;  // "<split>/<id>"
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::size_t sources = 2;
  double clip_len_s = kClipLengthS;
  int sample_rate_hz = kDefaultSampleRate;
  bool distinct_groups = false;
  std::vector<std::pair<std::string, Split>> partition;  // sorted by file id
  std::vector<MixtureRecipe> recipes;

  std::size_t FileCount(Split split) const;
  std::size_t MixtureCount(Split split) const;
  std::vector<const MixtureRecipe*> RecipesFor(Split split) const;
};

struct ManifestOptions {
  std::size_t sources = 2;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 1;
  double clip_len_s = kClipLengthS;
  // Each mixture takes its K files from K different groups.
  bool distinct_groups = false;
  // Per-source gain drawn uniformly in [-range, range] dB; 0 disables.
  double gain_db_range = 0.0;
};

// Split sizes by file count: round(0.7 n), round(0.2 n), remainder.
struct PartitionCounts {
  std::size_t train, validation, test;
};
PartitionCounts PartitionSizes(std::size_t n_files);

DatasetManifest BuildManifest(const std::vector<CorpusFile>& files,
                              const ManifestOptions& options);

std::string ManifestToString(const DatasetManifest& manifest);
DatasetManifest ManifestFromString(const std::string& text);
void WriteManifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest ReadManifest(const std::string& path);

// ---- Rendering --------------------------------------------------------------

struct MixtureExample {
  std::string id;
  Waveform mixture;
  std::vector<Waveform> references;
};

// References are rounded to float32 values so they survive float32 WAV
// storage unchanged; the mixture is their float64 sum in source order.
MixtureExample RenderMixture(const MixtureRecipe& recipe, const Corpus& corpus,
                             double clip_len_s = kClipLengthS);

std::vector<MixtureExample> RenderSplit(const DatasetManifest& manifest,
                                        const Corpus& corpus, Split split);

// Writes <root>/<split>/<id>/{mixture.wav, source0.wav, ...} as float32.
void WriteExample(const MixtureExample& example, const std::string& dir);
MixtureExample ReadExample(const std::string& dir, std::size_t sources,
                           const std::string& id = "");

}  // namespace unisep

#endif  // UNISEP_DATAGEN_H_
