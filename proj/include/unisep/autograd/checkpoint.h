// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Named-tensor container; layout documented in docs/checkpoint-format.md.

#ifndef UNISEP_AUTOGRAD_CHECKPOINT_H_
#define UNISEP_AUTOGRAD_CHECKPOINT_H_

#include <string>
#include <vector>

#include "unisep/autograd/tensor.h"

namespace unisep::ag {

constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::string metadata;  // free-form UTF-8, e.g. the experiment config
  std::vector<NamedArray> arrays;

  const NamedArray* Find(const std::string& name) const;
};

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace unisep::ag

#endif  // UNISEP_AUTOGRAD_CHECKPOINT_H_
