// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <vector>

#include "unisep/error.h"

namespace unisep {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T Load(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void Put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  UNISEP_CHECK(is.good(), ErrorCode::kUnreadableFile, "cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(is)),
                        std::istreambuf_iterator<char>());
  UNISEP_CHECK(buf.size() >= 12 && std::memcmp(buf.data(), "RIFF", 4) == 0 &&
                   std::memcmp(buf.data() + 8, "WAVE", 4) == 0,
               ErrorCode::kUnreadableFile, path + " is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_len = 0;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto len = Load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      UNISEP_CHECK(len >= 16 && body + 16 <= buf.size(),
                   ErrorCode::kUnreadableFile, "truncated fmt chunk in " + path);
      format = Load<std::uint16_t>(buf, body);
      channels = Load<std::uint16_t>(buf, body + 2);
      rate = Load<std::uint32_t>(buf, body + 4);
      bits = Load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && len >= 40 && body + 26 <= buf.size()) {
        format = Load<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = std::min<std::size_t>(len, buf.size() - body);
      have_data = true;
      break;
    }
    pos = body + len + (len & 1);
  }
  UNISEP_CHECK(have_fmt && have_data, ErrorCode::kUnreadableFile,
               "missing fmt or data chunk in " + path);
  UNISEP_CHECK(channels >= 1 && rate > 0, ErrorCode::kUnreadableFile,
               "bad channel count or sample rate in " + path);
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  UNISEP_CHECK(pcm16 || f32, ErrorCode::kUnsupportedEncoding,
               path + ": only PCM16 and float32 are supported");
  if (channels > 1) {
    std::cerr << "warning: " << path << " has " << channels
              << " channels; using channel 0\n";
  }

  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = data_len / frame_bytes;
  UNISEP_CHECK(frames > 0, ErrorCode::kEmptyAudio, path + " has no samples");

  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t at = data_pos + i * frame_bytes;
    if (pcm16) {
      samples[i] = Load<std::int16_t>(buf, at) / 32768.0;
    } else {
      samples[i] = Load<float>(buf, at);
    }
  }
  return Waveform(std::move(samples), static_cast<int>(rate));
}

void WriteWav(const Waveform& waveform, const std::string& path,
              WavEncoding encoding, bool clip) {
  ValidateWaveform(waveform);
  const bool pcm16 = encoding == WavEncoding::kPcm16;
  if (pcm16 && !clip) {
    for (double s : waveform.samples) {
      UNISEP_CHECK(s >= -1.0 && s <= 1.0, ErrorCode::kRangeViolation,
                   "sample outside [-1, 1] for PCM16; pass clip to saturate");
    }
  }
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(waveform.size() * (bits / 8));

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "cannot open " + path + " for writing");
  os.write("RIFF", 4);
  Put<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  Put<std::uint32_t>(os, 16);
  Put<std::uint16_t>(os, pcm16 ? kFormatPcm : kFormatFloat);
  Put<std::uint16_t>(os, 1);
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(waveform.sample_rate_hz));
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(waveform.sample_rate_hz) * (bits / 8));
  Put<std::uint16_t>(os, bits / 8);
  Put<std::uint16_t>(os, bits);
  os.write("data", 4);
  Put<std::uint32_t>(os, data_bytes);
  for (double s : waveform.samples) {
    if (pcm16) {
      const double code = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      Put<std::int16_t>(os, static_cast<std::int16_t>(code));
    } else {
      Put<float>(os, static_cast<float>(s));
    }
  }
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace unisep
