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

#ifndef MVMN_TOOLS_MANIFEST_H_
#define MVMN_TOOLS_MANIFEST_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mvmn::cli {

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

// Record of one tool invocation, written as <output>.manifest.json.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  // Writes next to `primary_output`.
  void write(const std::filesystem::path& primary_output) const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::uint64_t seed_ = 0;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  std::chrono::steady_clock::time_point start_;
};

std::string tool_version();

}  // namespace mvmn::cli

#endif  // MVMN_TOOLS_MANIFEST_H_
