// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/datagen.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "unisep/error.h"
#include "unisep/wav.h"

namespace unisep {
namespace fs = std::filesystem;
using nlohmann::json;

EventList DetectEvents(const Waveform& waveform, const EventDetectorOptions& options) {
  UNISEP_CHECK(options.rms_window_s > 0.0, ErrorCode::kInvalidArgument,
               "rms window must be positive");
  UNISEP_CHECK(options.hysteresis >= 0.0 && options.hysteresis < 1.0,
               ErrorCode::kInvalidArgument, "hysteresis must be in [0, 1)");
  UNISEP_CHECK(!waveform.empty(), ErrorCode::kEmptyAudio, "cannot detect events in empty audio");
  EventList out;
  const auto& x = waveform.samples;
  const std::size_t n = x.size();
  std::size_t win = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(options.rms_window_s * waveform.sample_rate_hz)));
  win = std::min(win, n);
  const std::size_t hop = std::max<std::size_t>(1, win / 2);

  std::vector<double> rms;
  for (std::size_t start = 0; start + win <= n; start += hop) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + win; ++i) acc += x[i] * x[i];
    rms.push_back(std::sqrt(acc / static_cast<double>(win)));
  }
  double mean = rms.empty() ? 0.0
                            : std::accumulate(rms.begin(), rms.end(), 0.0) /
                                  static_cast<double>(rms.size());
  if (mean <= 0.0) {
    out.silent = true;
    out.event_times = {0};
    return out;
  }
  const double low = mean * (1.0 - options.hysteresis);
  bool armed = rms[0] < low;
  for (std::size_t j = 1; j < rms.size(); ++j) {
    if (armed && rms[j] >= mean) {
      out.event_times.push_back(j * hop);
      armed = false;
    }
    if (rms[j] < low) armed = true;
  }
  if (out.event_times.empty()) out.event_times = {0};
  return out;
}

ClipDraw DrawClip(std::size_t file_len, int sample_rate_hz, double clip_len_s, Rng& rng) {
  ClipDraw draw;
  draw.offset_s = rng.Uniform(0.0, kMaxEventOffsetS);
  const auto clip = static_cast<std::size_t>(std::lround(clip_len_s * sample_rate_hz));
  if (file_len < clip) draw.loop_gap_s = rng.Uniform(0.0, kMaxLoopGapS);
  return draw;
}

Waveform ExtractClip(const Waveform& waveform, std::size_t event_time,
                     const ClipDraw& draw, double clip_len_s) {
  UNISEP_CHECK(!waveform.empty(), ErrorCode::kEmptyAudio, "cannot extract a clip from empty audio");
  UNISEP_CHECK(clip_len_s > 0.0, ErrorCode::kInvalidArgument, "clip length must be positive");
  const int rate = waveform.sample_rate_hz;
  const auto clip = static_cast<std::size_t>(std::lround(clip_len_s * rate));
  const std::size_t n = waveform.size();
  Waveform out(std::vector<double>(clip, 0.0), rate);

  if (n < clip) {
    UNISEP_CHECK(draw.loop_gap_s.has_value(), ErrorCode::kInvalidArgument,
                 "short file needs a loop gap");
    const auto gap = static_cast<std::size_t>(std::lround(*draw.loop_gap_s * rate));
    for (std::size_t pos = 0; pos < clip; pos += n + gap) {
      std::size_t count = std::min(n, clip - pos);
      std::copy_n(waveform.samples.begin(), count, out.samples.begin() + pos);
    }
    return out;
  }

  UNISEP_CHECK(event_time < n, ErrorCode::kInvalidArgument, "event time past end of file");
  const auto center = static_cast<long long>(event_time) +
                      static_cast<long long>(std::lround(draw.offset_s * rate));
  const long long start = center - static_cast<long long>(clip / 2);
  for (std::size_t i = 0; i < clip; ++i) {
    long long src = start + static_cast<long long>(i);
    if (src >= 0 && src < static_cast<long long>(n)) out.samples[i] = waveform.samples[src];
  }
  return out;
}

Waveform ExtractClip(const Waveform& waveform, std::size_t event_time, Rng& rng,
                     double clip_len_s, ClipDraw* draw_out) {
  ClipDraw draw = DrawClip(waveform.size(), waveform.sample_rate_hz, clip_len_s, rng);
  if (draw_out) *draw_out = draw;
  return ExtractClip(waveform, event_time, draw, clip_len_s);
}

// ---- Corpus -----------------------------------------------------------------

Corpus Corpus::FromDirectory(const std::string& root,
                             const std::vector<std::string>& excluded_ids,
                             const EventDetectorOptions& detector) {
  UNISEP_CHECK(fs::is_directory(root), ErrorCode::kIoError, "corpus directory not found: " + root);
  std::set<std::string> excluded(excluded_ids.begin(), excluded_ids.end());
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") paths.push_back(entry.path());
  }
  Corpus corpus;
  corpus.root_ = root;
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    fs::path rel = fs::relative(path, root);
    std::string id = rel.generic_string();
    if (excluded.count(id)) continue;
    Waveform w = ReadWav(path.string());
    CorpusFile file;
    file.id = id;
    auto first = rel.begin();
    if (std::distance(rel.begin(), rel.end()) > 1) file.group = first->string();
    file.length = w.size();
    file.sample_rate_hz = w.sample_rate_hz;
    file.events = DetectEvents(w, detector).event_times;
    corpus.index_[id] = corpus.files_.size();
    corpus.files_.push_back(std::move(file));
  }
  UNISEP_CHECK(!corpus.files_.empty(), ErrorCode::kIoError, "no WAV files under " + root);
  return corpus;
}

Corpus Corpus::InMemory(std::vector<std::pair<CorpusFile, Waveform>> files,
                        const EventDetectorOptions& detector) {
  Corpus corpus;
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
  for (auto& [file, wave] : files) {
    UNISEP_CHECK(!corpus.index_.count(file.id), ErrorCode::kInvalidArgument,
                 "duplicate corpus id " + file.id);
    ValidateWaveform(wave);
    file.length = wave.size();
    file.sample_rate_hz = wave.sample_rate_hz;
    file.events = DetectEvents(wave, detector).event_times;
    corpus.index_[file.id] = corpus.files_.size();
    corpus.files_.push_back(file);
    corpus.memory_[file.id] = std::move(wave);
  }
  return corpus;
}

const CorpusFile& Corpus::file(const std::string& id) const {
  auto it = index_.find(id);
  UNISEP_CHECK(it != index_.end(), ErrorCode::kInvalidArgument, "unknown corpus file " + id);
  return files_[it->second];
}

Waveform Corpus::Load(const std::string& id) const {
  auto it = memory_.find(id);
  if (it != memory_.end()) return it->second;
  file(id);
  return ReadWav((fs::path(root_) / id).string());
}

void Corpus::WriteTo(const std::string& root) const {
  for (const auto& f : files_) {
    fs::path path = fs::path(root) / f.id;
    fs::create_directories(path.parent_path());
    WriteWav(Load(f.id), path.string(), WavEncoding::kFloat32);
  }
}

SyntheticPreset ParseSyntheticPreset(const std::string& name) {
  if (name == "disjoint") return SyntheticPreset::kDisjoint;
  if (name == "tonal") return SyntheticPreset::kTonal;
  if (name == "mixed") return SyntheticPreset::kMixed;
  throw Error(ErrorCode::kInvalidArgument, "unknown synthetic preset: " + name);
}

const char* SyntheticPresetName(SyntheticPreset preset) {
  switch (preset) {
    case SyntheticPreset::kDisjoint: return "disjoint";
    case SyntheticPreset::kTonal: return "tonal";
    case SyntheticPreset::kMixed: return "mixed";
  }
  return "?";
}

namespace {

SynthSpec TonalSpec(Rng& rng, double lo, double hi) {
  SynthSpec spec;
  spec.kind = rng.Uniform() < 0.5 ? SynthKind::kTone : SynthKind::kChirp;
  spec.freq_hz = rng.Uniform(lo, hi);
  spec.freq2_hz = rng.Uniform(lo, hi);
  return spec;
}

SynthSpec NoiseSpec(Rng& rng) {
  SynthSpec spec;
  spec.kind = SynthKind::kBandNoise;
  spec.freq_hz = rng.Uniform(3000.0, 4500.0);
  spec.freq2_hz = std::min(6000.0, spec.freq_hz + rng.Uniform(500.0, 2500.0));
  return spec;
}

}  // namespace

Corpus MakeSyntheticCorpus(const SyntheticCorpusOptions& options,
                           const EventDetectorOptions& detector) {
  UNISEP_CHECK(options.n_files > 0, ErrorCode::kInvalidArgument, "n_files must be positive");
  UNISEP_CHECK(options.min_duration_s > 0.0 && options.max_duration_s >= options.min_duration_s,
               ErrorCode::kInvalidArgument, "bad duration range");
  std::vector<std::pair<CorpusFile, Waveform>> files;
  for (std::size_t i = 0; i < options.n_files; ++i) {
    Rng rng = Rng::Derive(options.seed, i);
    double duration = rng.Uniform(options.min_duration_s, options.max_duration_s);
    SynthSpec spec;
    std::string group;
    switch (options.preset) {
      case SyntheticPreset::kDisjoint:
        if (i % 2 == 0) {
          spec = TonalSpec(rng, 200.0, 1500.0);
          group = "tonal";
        } else {
          spec = NoiseSpec(rng);
          group = "noise";
        }
        break;
      case SyntheticPreset::kTonal:
        spec = TonalSpec(rng, 200.0, 2000.0);
        break;
      case SyntheticPreset::kMixed: {
        auto kind = static_cast<SynthKind>(rng.UniformInt(5));
        if (kind == SynthKind::kTone || kind == SynthKind::kChirp) {
          spec = TonalSpec(rng, 200.0, 2000.0);
          spec.kind = kind;
        } else if (kind == SynthKind::kBandNoise) {
          spec.kind = kind;
          spec.freq_hz = rng.Uniform(100.0, 5000.0);
          spec.freq2_hz = std::min(7500.0, spec.freq_hz + rng.Uniform(200.0, 2000.0));
        } else if (kind == SynthKind::kImpulseTrain) {
          spec.kind = kind;
          spec.freq_hz = rng.Uniform(2.0, 20.0);
        } else {
          spec.kind = kind;
          spec.freq_hz = rng.Uniform(200.0, 2000.0);
          spec.onset_s = rng.Uniform(0.0, 0.6 * duration);
          spec.burst_s = rng.Uniform(0.2, 0.35 * duration);
        }
        break;
      }
    }
    spec.amplitude = rng.Uniform(0.3, 0.8);
    spec.seed = rng.NextU64();
    CorpusFile file;
    char name[32];
    std::snprintf(name, sizeof(name), "file%04zu.wav", i);
    file.id = group.empty() ? std::string(name) : group + "/" + name;
    file.group = group;
    Waveform audio = SynthSource(spec, duration, options.sample_rate_hz);
    // Stored as float32, so keep the in-memory copy identical to the file.
    for (double& v : audio.samples) v = static_cast<float>(v);
    files.emplace_back(file, std::move(audio));
  }
  return Corpus::InMemory(std::move(files), detector);
}

// ---- Manifest ---------------------------------------------------------------

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split: " + name);
}

std::size_t DatasetManifest::FileCount(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      partition.begin(), partition.end(), [&](const auto& p) { return p.second == split; }));
}

std::size_t DatasetManifest::MixtureCount(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      recipes.begin(), recipes.end(), [&](const auto& r) { return r.split == split; }));
}

std::vector<const MixtureRecipe*> DatasetManifest::RecipesFor(Split split) const {
  std::vector<const MixtureRecipe*> out;
  for (const auto& r : recipes)
    if (r.split == split) out.push_back(&r);
  return out;
}

PartitionCounts PartitionSizes(std::size_t n_files) {
  PartitionCounts c;
  c.train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n_files)));
  c.validation = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n_files)));
  c.validation = std::min(c.validation, n_files - c.train);
  c.test = n_files - c.train - c.validation;
  return c;
}

namespace {

// Orders files for the partition. With groups, each group is shuffled and
// the groups are interleaved so every split sees every group.
std::vector<const CorpusFile*> PartitionOrder(const std::vector<const CorpusFile*>& sorted,
                                              bool by_group, Rng& rng) {
  if (!by_group) {
    std::vector<const CorpusFile*> order = sorted;
    rng.Shuffle(order);
    return order;
  }
  std::map<std::string, std::vector<const CorpusFile*>> groups;
  for (const auto* f : sorted) groups[f->group].push_back(f);
  for (auto& [name, members] : groups) rng.Shuffle(members);
  std::vector<const CorpusFile*> order;
  for (std::size_t round = 0; order.size() < sorted.size(); ++round)
    for (auto& [name, members] : groups)
      if (round < members.size()) order.push_back(members[round]);
  return order;
}

SourceDraw DrawSource(const CorpusFile& file, const ManifestOptions& options, Rng& rng) {
  SourceDraw s;
  s.file = file.id;
  s.event = file.events.empty() ? 0 : file.events[rng.UniformInt(file.events.size())];
  ClipDraw draw = DrawClip(file.length, file.sample_rate_hz, options.clip_len_s, rng);
  s.offset_s = draw.offset_s;
  s.loop_gap_s = draw.loop_gap_s;
  if (options.gain_db_range > 0.0)
    s.gain_db = rng.Uniform(-options.gain_db_range, options.gain_db_range);
  return s;
}

}  // namespace

DatasetManifest BuildManifest(const std::vector<CorpusFile>& files,
                              const ManifestOptions& options) {
  UNISEP_CHECK(options.sources >= 1, ErrorCode::kInvalidArgument, "need at least one source");
  UNISEP_CHECK(options.clip_len_s > 0.0, ErrorCode::kInvalidArgument, "clip length must be positive");
  UNISEP_CHECK(!files.empty(), ErrorCode::kInvalidArgument, "empty corpus");
  std::vector<const CorpusFile*> sorted;
  for (const auto& f : files) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(),
            [](const CorpusFile* a, const CorpusFile* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    UNISEP_CHECK(sorted[i]->id != sorted[i - 1]->id, ErrorCode::kInvalidArgument,
                 "duplicate corpus id " + sorted[i]->id);
  const int rate = sorted.front()->sample_rate_hz;
  for (const auto* f : sorted)
    UNISEP_CHECK(f->sample_rate_hz == rate, ErrorCode::kInvalidArgument,
                 "corpus mixes sample rates");

  DatasetManifest m;
  m.seed = options.seed;
  m.sources = options.sources;
  m.clip_len_s = options.clip_len_s;
  m.sample_rate_hz = rate;
  m.distinct_groups = options.distinct_groups;

  Rng rng(options.seed);
  auto order = PartitionOrder(sorted, options.distinct_groups, rng);
  PartitionCounts counts = PartitionSizes(order.size());
  std::map<std::string, Split> split_of;
  std::map<Split, std::vector<const CorpusFile*>> members;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Split s = i < counts.train ? Split::kTrain
              : i < counts.train + counts.validation ? Split::kValidation
                                                     : Split::kTest;
    split_of[order[i]->id] = s;
    members[s].push_back(order[i]);
  }
  for (const auto* f : sorted) m.partition.emplace_back(f->id, split_of[f->id]);
  for (auto& [s, list] : members)
    std::sort(list.begin(), list.end(),
              [](const CorpusFile* a, const CorpusFile* b) { return a->id < b->id; });

  const std::pair<Split, std::size_t> wanted[] = {{Split::kTrain, options.n_train},
                                                  {Split::kValidation, options.n_validation},
                                                  {Split::kTest, options.n_test}};
  std::uint64_t recipe_index = 0;
  for (const auto& [split, count] : wanted) {
    if (count == 0) continue;
    const auto& pool = members[split];
    std::map<std::string, std::vector<const CorpusFile*>> by_group;
    for (const auto* f : pool) by_group[f->group].push_back(f);
    if (options.distinct_groups) {
      UNISEP_CHECK(by_group.size() >= options.sources, ErrorCode::kInvalidArgument,
                   std::string("split ") + SplitName(split) + " has fewer groups than sources");
    } else {
      UNISEP_CHECK(pool.size() >= options.sources, ErrorCode::kInvalidArgument,
                   std::string("split ") + SplitName(split) + " has fewer files than sources");
    }
    std::vector<std::string> group_names;
    for (const auto& [g, list] : by_group) group_names.push_back(g);

    for (std::size_t i = 0; i < count; ++i, ++recipe_index) {
      MixtureRecipe recipe;
      recipe.split = split;
      recipe.seed = recipe_index;
      char name[64];
      std::snprintf(name, sizeof(name), "%s-%05zu", SplitName(split), i);
      recipe.id = name;
      recipe.output_path = std::string(SplitName(split)) + "/" + recipe.id;
      Rng r = Rng::Derive(options.seed, recipe_index);
      std::vector<const CorpusFile*> chosen;
      if (options.distinct_groups) {
        std::vector<std::string> groups = group_names;
        r.Shuffle(groups);
        for (std::size_t k = 0; k < options.sources; ++k) {
          const auto& list = by_group[groups[k]];
          chosen.push_back(list[r.UniformInt(list.size())]);
        }
      } else {
        std::vector<const CorpusFile*> all = pool;
        for (std::size_t k = 0; k < options.sources; ++k) {
          std::size_t j = k + r.UniformInt(all.size() - k);
          std::swap(all[k], all[j]);
          chosen.push_back(all[k]);
        }
      }
      for (const auto* f : chosen) recipe.sources.push_back(DrawSource(*f, options, r));
      m.recipes.push_back(std::move(recipe));
    }
  }
  return m;
}

std::string ManifestToString(const DatasetManifest& m) {
  std::ostringstream out;
  json header = {{"type", "header"},
                 {"version", 1},
                 {"seed", m.seed},
                 {"sources", m.sources},
                 {"clip_len_s", m.clip_len_s},
                 {"sample_rate_hz", m.sample_rate_hz},
                 {"distinct_groups", m.distinct_groups},
                 {"files",
                  {{"train", m.FileCount(Split::kTrain)},
                   {"val", m.FileCount(Split::kValidation)},
                   {"test", m.FileCount(Split::kTest)}}},
                 {"mixtures",
                  {{"train", m.MixtureCount(Split::kTrain)},
                   {"val", m.MixtureCount(Split::kValidation)},
                   {"test", m.MixtureCount(Split::kTest)}}}};
  out << header.dump() << '\n';
  for (const auto& [id, split] : m.partition)
    out << json{{"type", "file"}, {"id", id}, {"split", SplitName(split)}}.dump() << '\n';
  for (const auto& r : m.recipes) {
    json sources = json::array();
    for (const auto& s : r.sources) {
      json j = {{"file", s.file}, {"event", s.event}, {"offset_s", s.offset_s},
                {"gain_db", s.gain_db}};
      j["loop_gap_s"] = s.loop_gap_s ? json(*s.loop_gap_s) : json(nullptr);
      sources.push_back(j);
    }
    out << json{{"type", "mixture"},   {"id", r.id},
                {"split", SplitName(r.split)}, {"seed", r.seed},
                {"output_path", r.output_path}, {"sources", sources}}
               .dump()
        << '\n';
  }
  return out.str();
}

DatasetManifest ManifestFromString(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        UNISEP_CHECK(j.at("version").get<int>() == 1, ErrorCode::kFormatError,
                     "unsupported manifest version");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.sources = j.at("sources").get<std::size_t>();
        m.clip_len_s = j.at("clip_len_s").get<double>();
        m.sample_rate_hz = j.at("sample_rate_hz").get<int>();
        m.distinct_groups = j.at("distinct_groups").get<bool>();
        have_header = true;
      } else if (type == "file") {
        m.partition.emplace_back(j.at("id").get<std::string>(),
                                 ParseSplit(j.at("split").get<std::string>()));
      } else if (type == "mixture") {
        MixtureRecipe r;
        r.id = j.at("id").get<std::string>();
        r.split = ParseSplit(j.at("split").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.output_path = j.at("output_path").get<std::string>();
        for (const auto& s : j.at("sources")) {
          SourceDraw d;
          d.file = s.at("file").get<std::string>();
          d.event = s.at("event").get<std::size_t>();
          d.offset_s = s.at("offset_s").get<double>();
          d.gain_db = s.value("gain_db", 0.0);
          if (!s.at("loop_gap_s").is_null()) d.loop_gap_s = s.at("loop_gap_s").get<double>();
          r.sources.push_back(d);
        }
        m.recipes.push_back(std::move(r));
      } else {
        throw Error(ErrorCode::kFormatError, "unknown manifest record type " + type);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError,
                "manifest line " + std::to_string(line_no) + ": " + e.what());
  }
  UNISEP_CHECK(have_header, ErrorCode::kFormatError, "manifest has no header line");
  return m;
}

void WriteManifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  UNISEP_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  out << ManifestToString(manifest);
  UNISEP_CHECK(out.good(), ErrorCode::kIoError, "write failed for " + path);
}

DatasetManifest ReadManifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  UNISEP_CHECK(in.good(), ErrorCode::kIoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ManifestFromString(buffer.str());
}

// ---- Rendering --------------------------------------------------------------

MixtureExample RenderMixture(const MixtureRecipe& recipe, const Corpus& corpus,
                             double clip_len_s) {
  UNISEP_CHECK(!recipe.sources.empty(), ErrorCode::kInvalidArgument, "recipe has no sources");
  MixtureExample ex;
  ex.id = recipe.id;
  for (const auto& s : recipe.sources) {
    Waveform w = corpus.Load(s.file);
    ClipDraw draw{s.offset_s, s.loop_gap_s};
    Waveform clip = ExtractClip(w, s.event, draw, clip_len_s);
    const double gain = std::pow(10.0, s.gain_db / 20.0);
    for (double& v : clip.samples) v = static_cast<double>(static_cast<float>(v * gain));
    ex.references.push_back(std::move(clip));
  }
  const auto& first = ex.references.front();
  ex.mixture = Waveform(std::vector<double>(first.size(), 0.0), first.sample_rate_hz);
  for (const auto& r : ex.references) {
    UNISEP_CHECK(r.size() == first.size() && r.sample_rate_hz == first.sample_rate_hz,
                 ErrorCode::kShapeMismatch, "reference clips disagree in length or rate");
    for (std::size_t i = 0; i < r.size(); ++i) ex.mixture.samples[i] += r.samples[i];
  }
  return ex;
}

std::vector<MixtureExample> RenderSplit(const DatasetManifest& manifest,
                                        const Corpus& corpus, Split split) {
  std::vector<MixtureExample> out;
  for (const auto* r : manifest.RecipesFor(split))
    out.push_back(RenderMixture(*r, corpus, manifest.clip_len_s));
  return out;
}

void WriteExample(const MixtureExample& example, const std::string& dir) {
  fs::create_directories(dir);
  WriteWav(example.mixture, (fs::path(dir) / "mixture.wav").string(), WavEncoding::kFloat32);
  for (std::size_t k = 0; k < example.references.size(); ++k)
    WriteWav(example.references[k],
             (fs::path(dir) / ("source" + std::to_string(k) + ".wav")).string(),
             WavEncoding::kFloat32);
}

MixtureExample ReadExample(const std::string& dir, std::size_t sources, const std::string& id) {
  MixtureExample ex;
  ex.id = id.empty() ? fs::path(dir).filename().string() : id;
  ex.mixture = ReadWav((fs::path(dir) / "mixture.wav").string());
  for (std::size_t k = 0; k < sources; ++k)
    ex.references.push_back(
        ReadWav((fs::path(dir) / ("source" + std::to_string(k) + ".wav")).string()));
  return ex;
}

}  // namespace unisep
