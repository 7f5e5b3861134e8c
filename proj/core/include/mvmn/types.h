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

#ifndef MVMN_TYPES_H_
#define MVMN_TYPES_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvmn {

using UserId = std::int32_t;
using LocationId = std::int32_t;

inline constexpr int kHoursPerDay = 24;
inline constexpr int kGapBins = 6;
inline constexpr int kDefaultKMax = 200;

// Raised when an input file or record cannot be parsed. `line()` is 1-based,
// or 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CheckIn {
  LocationId location = 0;
  std::int64_t timestamp = 0;  // epoch seconds, UTC

  double hours() const { return static_cast<double>(timestamp) / 3600.0; }
  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

struct Trajectory {
  UserId user = 0;
  std::vector<CheckIn> events;  // sorted by timestamp, non-decreasing

  std::size_t length() const { return events.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// How timestamps are discretized for the time-bin embedding table.
enum class TimeBinning {
  kHourOfDay,   // 24 bins
  kHourOfWeek,  // 168 bins
};

int time_bin_count(TimeBinning binning);
int time_bin(std::int64_t timestamp, TimeBinning binning);

// floor(timestamp / 3600) mod 24.
int hour_of_day_bin(std::int64_t timestamp);

// Index of the half-open interval [0,1) [1,2) [2,6) [6,12) [12,24) [24,inf)
// (hours) that contains `delta_hours`. Throws std::invalid_argument on a
// negative or NaN gap.
int gap_interval_bin(double delta_hours);

// Undirected social edge stored as (min id, max id).
struct Edge {
  UserId a = 0;
  UserId b = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Throws std::invalid_argument for a self loop.
Edge make_edge(UserId u, UserId v);

// Sorted, duplicate-free list of edges.
using EdgeSet = std::vector<Edge>;

void normalize(EdgeSet& edges);
bool contains(const EdgeSet& edges, Edge e);

struct LabeledPair {
  UserId m = 0;
  UserId n = 0;
  int label = 0;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// View-specific matching representations of one user pair. Disabled views
// are left empty.
struct MatchViews {
  Eigen::VectorXd v_loc;   // 2 * k_max
  Eigen::VectorXd v_time;  // hidden size
  Eigen::VectorXd v_rel;   // embedding size
};

class Dataset {
 public:
  std::vector<std::string> users;      // raw id per UserId
  std::vector<std::string> locations;  // raw id per LocationId
  TimeBinning time_binning = TimeBinning::kHourOfDay;
  int k_max = kDefaultKMax;
  std::vector<Trajectory> trajectories;  // indexed by UserId
  EdgeSet train_edges;
  EdgeSet val_edges;
  EdgeSet test_edges;
  // Owner followed by its train-edge neighbors in ascending order.
  std::vector<std::vector<UserId>> train_adjacency;
  // Opaque JSON object recording how the dataset was produced.
  std::string provenance = "{}";

  std::size_t num_users() const { return users.size(); }
  std::size_t num_locations() const { return locations.size(); }
  int num_time_bins() const { return time_bin_count(time_binning); }

  // Rebuilds train_adjacency from train_edges.
  void build_adjacency();

  // Linked in any split.
  bool linked(UserId u, UserId v) const;

  // Union of the three splits, sorted.
  EdgeSet all_edges() const;

  // Throws std::invalid_argument if any structural invariant fails.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace mvmn

#endif  // MVMN_TYPES_H_
