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

#include "mvmn/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmn/types.h"

namespace mvmn {

namespace {

constexpr char kMagic[8] = {'M', 'V', 'M', 'N', 'C', 'K', 'P', 'T'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("checkpoint truncated", 0);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const ad::Parameter& p = ckpt.params.at(i);
    tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()},
                       {"offset", offset}});
    offset += static_cast<std::uint64_t>(p.value.size()) * 8;
  }
  nlohmann::json header = {
      {"format", "mvmn-checkpoint"},
      {"version", 1},
      {"config", to_json(ckpt.config)},
      {"epoch", ckpt.epoch},
      {"val_auc", std::isfinite(ckpt.val_auc) ? nlohmann::json(ckpt.val_auc) : nlohmann::json()},
      {"seed", ckpt.seed},
      {"dataset_fingerprint", ckpt.dataset_fingerprint},
      {"tensors", tensors}};
  const std::string text = header.dump();
  out.write(kMagic, 8);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const ad::Matrix& v = ckpt.params.at(i).value;
    for (ad::Index k = 0; k < v.size(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(v.data()[k]));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a checkpoint file (bad magic)", 0);
  }
  const std::uint64_t len = get_u64(in);
  if (len > (1u << 30)) throw ParseError("checkpoint header too large", 0);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw ParseError("checkpoint header truncated", 0);
  }
  Checkpoint ckpt;
  std::vector<std::pair<std::string, std::pair<ad::Index, ad::Index>>> manifest;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("format") != "mvmn-checkpoint" || header.at("version") != 1) {
      throw ParseError("unsupported checkpoint format", 0);
    }
    ckpt.config = model_config_from_json(header.at("config"));
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.val_auc = header.at("val_auc").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                  : header.at("val_auc").get<double>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.dataset_fingerprint = header.at("dataset_fingerprint").get<std::string>();
    std::uint64_t expect = 0;
    for (const auto& t : header.at("tensors")) {
      if (t.at("offset").get<std::uint64_t>() != expect) {
        throw ParseError("checkpoint tensor offsets are not contiguous", 0);
      }
      const auto rows = t.at("rows").get<ad::Index>();
      const auto cols = t.at("cols").get<ad::Index>();
      if (rows < 0 || cols < 0) throw ParseError("negative tensor shape", 0);
      manifest.push_back({t.at("name").get<std::string>(), {rows, cols}});
      expect += static_cast<std::uint64_t>(rows * cols) * 8;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what(), 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what(), 0);
  }
  for (const auto& [name, shape] : manifest) {
    ad::Parameter& p = ckpt.params.add(name, shape.first, shape.second);
    for (ad::Index k = 0; k < p.value.size(); ++k) {
      p.value.data()[k] = std::bit_cast<double>(get_u64(in));
    }
  }
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

Checkpoint make_checkpoint(const Model& model, int epoch, double val_auc,
                           const std::string& dataset_fingerprint) {
  Checkpoint c;
  c.config = model.config();
  c.params = model.params();
  c.params.zero_grad();
  c.epoch = epoch;
  c.val_auc = val_auc;
  c.seed = model.config().seed;
  c.dataset_fingerprint = dataset_fingerprint;
  return c;
}

}  // namespace mvmn
