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

#include "mvmn/dataset_io.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "mvmn/seeding.h"

namespace mvmn {
namespace {

using nlohmann::json;

const char* binning_name(TimeBinning b) {
  return b == TimeBinning::kHourOfWeek ? "hour_of_week" : "hour_of_day";
}

TimeBinning parse_binning(const std::string& name, std::size_t line) {
  if (name == "hour_of_day") return TimeBinning::kHourOfDay;
  if (name == "hour_of_week") return TimeBinning::kHourOfWeek;
  throw ParseError("unknown time_binning '" + name + "'", line);
}

json edges_json(const EdgeSet& edges) {
  json arr = json::array();
  for (const Edge& e : edges) arr.push_back({e.a, e.b});
  return arr;
}

}  // namespace

std::string dataset_fingerprint(const Dataset& dataset) {
  json prov = json::parse(dataset.provenance, nullptr, false);
  const std::string canonical = prov.is_discarded() ? dataset.provenance : prov.dump();
  return hex64(fnv1a64(canonical));
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  json header = {
      {"kind", "header"},
      {"format", "mvmn-dataset"},
      {"version", kDatasetFormatVersion},
      {"users", dataset.users},
      {"locations", dataset.locations},
      {"time_binning", binning_name(dataset.time_binning)},
      {"k_max", dataset.k_max},
      {"num_trajectories", dataset.trajectories.size()},
      {"provenance", json::parse(dataset.provenance)},
      {"fingerprint", dataset_fingerprint(dataset)},
  };
  out << header.dump() << '\n';
  for (const Trajectory& t : dataset.trajectories) {
    json locs = json::array();
    json stamps = json::array();
    for (const CheckIn& c : t.events) {
      locs.push_back(c.location);
      stamps.push_back(c.timestamp);
    }
    json line = {{"kind", "trajectory"}, {"user", t.user}, {"locations", locs},
                 {"timestamps", stamps}};
    out << line.dump() << '\n';
  }
  const std::pair<const char*, const EdgeSet*> splits[] = {
      {"train", &dataset.train_edges}, {"val", &dataset.val_edges},
      {"test", &dataset.test_edges}};
  for (const auto& [name, edges] : splits) {
    json line = {{"kind", "split"}, {"name", name}, {"edges", edges_json(*edges)}};
    out << line.dump() << '\n';
  }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(dataset, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t expected_trajectories = 0;
  bool seen_split[3] = {false, false, false};
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("invalid JSON", line_no);
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        if (have_header) throw ParseError("duplicate header", line_no);
        if (j.at("format").get<std::string>() != "mvmn-dataset") {
          throw ParseError("not an mvmn-dataset file", line_no);
        }
        if (j.at("version").get<int>() != kDatasetFormatVersion) {
          throw ParseError("unsupported dataset version", line_no);
        }
        ds.users = j.at("users").get<std::vector<std::string>>();
        ds.locations = j.at("locations").get<std::vector<std::string>>();
        ds.time_binning = parse_binning(j.at("time_binning").get<std::string>(), line_no);
        ds.k_max = j.at("k_max").get<int>();
        expected_trajectories = j.at("num_trajectories").get<std::size_t>();
        ds.provenance = j.at("provenance").dump();
        have_header = true;
      } else if (!have_header) {
        throw ParseError("record before header", line_no);
      } else if (kind == "trajectory") {
        Trajectory t;
        t.user = j.at("user").get<UserId>();
        const auto locs = j.at("locations").get<std::vector<LocationId>>();
        const auto stamps = j.at("timestamps").get<std::vector<std::int64_t>>();
        if (locs.size() != stamps.size()) {
          throw ParseError("locations/timestamps length mismatch", line_no);
        }
        if (t.user != static_cast<UserId>(ds.trajectories.size())) {
          throw ParseError("trajectories out of order", line_no);
        }
        for (std::size_t i = 0; i < locs.size(); ++i) t.events.push_back({locs[i], stamps[i]});
        ds.trajectories.push_back(std::move(t));
      } else if (kind == "split") {
        const std::string name = j.at("name").get<std::string>();
        EdgeSet* target = nullptr;
        int idx = 0;
        if (name == "train") {
          target = &ds.train_edges;
        } else if (name == "val") {
          target = &ds.val_edges;
          idx = 1;
        } else if (name == "test") {
          target = &ds.test_edges;
          idx = 2;
        } else {
          throw ParseError("unknown split '" + name + "'", line_no);
        }
        if (seen_split[idx]) throw ParseError("duplicate split '" + name + "'", line_no);
        seen_split[idx] = true;
        for (const auto& pair : j.at("edges")) {
          if (!pair.is_array() || pair.size() != 2) throw ParseError("bad edge", line_no);
          target->push_back({pair[0].get<UserId>(), pair[1].get<UserId>()});
        }
      } else {
        throw ParseError("unknown record kind '" + kind + "'", line_no);
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("missing header", 0);
  if (ds.trajectories.size() != expected_trajectories) {
    throw ParseError("expected " + std::to_string(expected_trajectories) +
                         " trajectories, found " + std::to_string(ds.trajectories.size()),
                     0);
  }
  if (!(seen_split[0] && seen_split[1] && seen_split[2])) {
    throw ParseError("missing split record", 0);
  }
  ds.build_adjacency();
  ds.validate();
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace mvmn
