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

#include "mvmn/types.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace mvmn {

int time_bin_count(TimeBinning binning) {
  switch (binning) {
    case TimeBinning::kHourOfDay:
      return kHoursPerDay;
    case TimeBinning::kHourOfWeek:
      return 7 * kHoursPerDay;
  }
  return kHoursPerDay;
}

int time_bin(std::int64_t timestamp, TimeBinning binning) {
  if (timestamp < 0) throw std::invalid_argument("negative timestamp");
  const std::int64_t hour = timestamp / 3600;
  return static_cast<int>(hour % time_bin_count(binning));
}

int hour_of_day_bin(std::int64_t timestamp) {
  return time_bin(timestamp, TimeBinning::kHourOfDay);
}

int gap_interval_bin(double delta_hours) {
  if (!(delta_hours >= 0.0)) {
    throw std::invalid_argument("gap_interval_bin: negative gap " +
                                std::to_string(delta_hours));
  }
  static constexpr std::array<double, kGapBins - 1> kUpper = {1, 2, 6, 12, 24};
  int bin = 0;
  while (bin < kGapBins - 1 && delta_hours >= kUpper[bin]) ++bin;
  return bin;
}

Edge make_edge(UserId u, UserId v) {
  if (u == v) throw std::invalid_argument("self loop on user " + std::to_string(u));
  return u < v ? Edge{u, v} : Edge{v, u};
}

void normalize(EdgeSet& edges) {
  for (auto& e : edges) e = make_edge(e.a, e.b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

bool contains(const EdgeSet& edges, Edge e) {
  return std::binary_search(edges.begin(), edges.end(), e);
}

void Dataset::build_adjacency() {
  train_adjacency.assign(num_users(), {});
  for (std::size_t u = 0; u < num_users(); ++u) {
    train_adjacency[u].push_back(static_cast<UserId>(u));
  }
  for (const Edge& e : train_edges) {
    if (e.a < 0 || e.b < 0 || static_cast<std::size_t>(e.a) >= num_users() ||
        static_cast<std::size_t>(e.b) >= num_users() || e.a == e.b) {
      throw std::invalid_argument("train edge (" + std::to_string(e.a) + "," +
                                  std::to_string(e.b) + ") out of range");
    }
    train_adjacency[e.a].push_back(e.b);
    train_adjacency[e.b].push_back(e.a);
  }
  for (auto& list : train_adjacency) std::sort(list.begin() + 1, list.end());
}

bool Dataset::linked(UserId u, UserId v) const {
  if (u == v) return false;
  const Edge e = make_edge(u, v);
  return contains(train_edges, e) || contains(val_edges, e) || contains(test_edges, e);
}

EdgeSet Dataset::all_edges() const {
  EdgeSet all;
  all.reserve(train_edges.size() + val_edges.size() + test_edges.size());
  all.insert(all.end(), train_edges.begin(), train_edges.end());
  all.insert(all.end(), val_edges.begin(), val_edges.end());
  all.insert(all.end(), test_edges.begin(), test_edges.end());
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

void check_split(const EdgeSet& edges, std::size_t n, const char* name) {
  if (!std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument(std::string(name) + " edges not sorted/unique");
  }
  for (const Edge& e : edges) {
    if (e.a < 0 || e.a >= e.b || static_cast<std::size_t>(e.b) >= n) {
      throw std::invalid_argument(std::string(name) + " edge (" + std::to_string(e.a) +
                                  "," + std::to_string(e.b) + ") invalid");
    }
  }
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = num_users();
  if (trajectories.size() != n) {
    throw std::invalid_argument("trajectory count does not match user count");
  }
  for (std::size_t u = 0; u < n; ++u) {
    const Trajectory& t = trajectories[u];
    if (t.user != static_cast<UserId>(u)) {
      throw std::invalid_argument("trajectory " + std::to_string(u) + " has wrong owner");
    }
    if (t.events.empty()) {
      throw std::invalid_argument("user " + users[u] + " has an empty trajectory");
    }
    if (k_max > 0 && t.length() > static_cast<std::size_t>(k_max)) {
      throw std::invalid_argument("user " + users[u] + " exceeds k_max");
    }
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      const CheckIn& c = t.events[i];
      if (c.location < 0 || static_cast<std::size_t>(c.location) >= num_locations()) {
        throw std::invalid_argument("user " + users[u] + " has invalid location id");
      }
      if (c.timestamp < 0) throw std::invalid_argument("negative timestamp");
      if (i > 0 && c.timestamp < t.events[i - 1].timestamp) {
        throw std::invalid_argument("user " + users[u] + " trajectory not sorted");
      }
    }
  }
  check_split(train_edges, n, "train");
  check_split(val_edges, n, "val");
  check_split(test_edges, n, "test");
  EdgeSet all = all_edges();
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("edge splits are not disjoint");
  }
  if (train_adjacency.size() != n) throw std::invalid_argument("adjacency size mismatch");
  std::size_t degree_sum = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto& list = train_adjacency[u];
    if (list.empty() || list.front() != static_cast<UserId>(u)) {
      throw std::invalid_argument("adjacency of user " + std::to_string(u) +
                                  " lacks its self loop");
    }
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (!contains(train_edges, make_edge(static_cast<UserId>(u), list[i]))) {
        throw std::invalid_argument("adjacency contains a non-train edge");
      }
    }
    degree_sum += list.size() - 1;
  }
  if (degree_sum != 2 * train_edges.size()) {
    throw std::invalid_argument("adjacency does not cover all train edges");
  }
}

}  // namespace mvmn
