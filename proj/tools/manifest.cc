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

#include "manifest.h"

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <openssl/evp.h>

#ifndef MVMN_VERSION
#define MVMN_VERSION "0.0.0"
#endif

namespace mvmn::cli {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string tool_version() { return MVMN_VERSION; }

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

nlohmann::json RunManifest::to_json() const {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return {{"command", command_},  {"config", config_},   {"seed", seed_},
          {"inputs", inputs_},    {"outputs", outputs_}, {"tool_version", tool_version()},
          {"duration_seconds", seconds}};
}

void RunManifest::write(const std::filesystem::path& primary_output) const {
  std::filesystem::path path = primary_output;
  path += ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

}  // namespace mvmn::cli
