// Copyright 2026 The MVMN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MVMN_CHECKPOINT_H_
#define MVMN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "mvmn/model.h"
#include "mvmn/params.h"

namespace mvmn {

// Binary layout:
//   8 bytes   magic "MVMNCKPT"
//   8 bytes   header length N, little-endian uint64
//   N bytes   JSON header: config, epoch, val_auc, seed, dataset fingerprint,
//             tensors: [{name, rows, cols, offset}] (offset in bytes from the
//             start of the data block)
//   rest      raw little-endian IEEE-754 doubles, row-major, in manifest order
struct Checkpoint {
  ModelConfig config;
  ParamStore params;
  int epoch = 0;
  double val_auc = 0.0;  // NaN when never evaluated
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws ParseError on a malformed or truncated file.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const Model& model, int epoch, double val_auc,
                           const std::string& dataset_fingerprint);

}  // namespace mvmn

#endif  // MVMN_CHECKPOINT_H_
