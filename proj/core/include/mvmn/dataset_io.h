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

#ifndef MVMN_DATASET_IO_H_
#define MVMN_DATASET_IO_H_

#include <filesystem>
#include <iosfwd>

#include "mvmn/types.h"

namespace mvmn {

// Processed-dataset JSON Lines format (see docs/formats.md):
//
//   {"kind":"header", "format":"mvmn-dataset", "version":1, "users":[...],
//    "locations":[...], "time_binning":"hour_of_day", "k_max":200,
//    "num_trajectories":N, "provenance":{...}, "fingerprint":"<16 hex>"}
//   {"kind":"trajectory", "user":0, "locations":[...], "timestamps":[...]}
//   ...
//   {"kind":"split", "name":"train", "edges":[[a,b], ...]}   (train, val, test)
//
// Adjacency is not stored; it is rebuilt from the train split on load.
inline constexpr int kDatasetFormatVersion = 1;

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Throws ParseError on malformed input and std::invalid_argument when the
// decoded dataset violates an invariant.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Fingerprint written into the header; a function of the provenance object.
std::string dataset_fingerprint(const Dataset& dataset);

}  // namespace mvmn

#endif  // MVMN_DATASET_IO_H_
