// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/autograd/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "unisep/error.h"

namespace unisep::ag {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");

constexpr char kMagic[8] = {'U', 'S', 'E', 'P', 'C', 'K', 'P', 'T'};

template <typename T>
void Put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  UNISEP_CHECK(is.good(), ErrorCode::kFormatError, "truncated checkpoint");
  return v;
}

std::string GetString(std::istream& is) {
  const auto len = Get<std::uint32_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  UNISEP_CHECK(is.good() || len == 0, ErrorCode::kFormatError, "truncated checkpoint");
  return s;
}

void PutString(std::ostream& os, const std::string& s) {
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

const NamedArray* Checkpoint::Find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(os, kCheckpointVersion);
  PutString(os, ckpt.metadata);
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    UNISEP_CHECK(NumElements(a.shape) == a.values.size(), ErrorCode::kShapeMismatch,
                 "array '" + a.name + "' size does not match its shape");
    PutString(os, a.name);
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(a.shape.size()));
    for (std::size_t d : a.shape) Put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(a.values.data()),
             static_cast<std::streamsize>(a.values.size() * sizeof(double)));
  }
  UNISEP_CHECK(os.good(), ErrorCode::kIoError, "write failed for " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  UNISEP_CHECK(is.good(), ErrorCode::kUnreadableFile, "cannot open checkpoint " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  UNISEP_CHECK(is.good() && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::kFormatError,
               path + " is not a checkpoint");
  const auto version = Get<std::uint32_t>(is);
  UNISEP_CHECK(version == kCheckpointVersion, ErrorCode::kFormatError,
               "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.metadata = GetString(is);
  const auto count = Get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = GetString(is);
    const auto rank = Get<std::uint32_t>(is);
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(Get<std::uint64_t>(is));
    a.values.resize(NumElements(a.shape));
    is.read(reinterpret_cast<char*>(a.values.data()),
            static_cast<std::streamsize>(a.values.size() * sizeof(double)));
    UNISEP_CHECK(is.good() || a.values.empty(), ErrorCode::kFormatError,
                 "truncated checkpoint");
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

}  // namespace unisep::ag
