// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_WAV_H_
#define UNISEP_WAV_H_

#include <string>

#include "unisep/signal.h"

namespace unisep {

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file. PCM16 samples are divided by 32768. Multi-channel
// files yield channel 0 and print a warning on stderr.
// Errors: kUnreadableFile, kUnsupportedEncoding, kEmptyAudio.
Waveform ReadWav(const std::string& path);

// PCM16 writing rejects samples outside [-1, 1] with kRangeViolation unless
// `clip` is set, in which case they saturate.
void WriteWav(const Waveform& waveform, const std::string& path,
              WavEncoding encoding = WavEncoding::kFloat32, bool clip = false);

}  // namespace unisep

#endif  // UNISEP_WAV_H_
