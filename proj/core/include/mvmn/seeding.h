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

#ifndef MVMN_SEEDING_H_
#define MVMN_SEEDING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace mvmn {

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

// Seed for one pipeline stage, derived from the run seed and the stage name so
// that stages draw independent streams from a single user-supplied seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t index);

}  // namespace mvmn

#endif  // MVMN_SEEDING_H_
