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

#ifndef MVMN_INGESTION_H_
#define MVMN_INGESTION_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvmn/types.h"

namespace mvmn {

enum class CheckinFormat { kGowallaTsv, kFoursquareTsv };

// Accepts "gowalla_tsv" / "foursquare_tsv".
CheckinFormat parse_checkin_format(std::string_view name);
std::string_view format_name(CheckinFormat format);

struct RawCheckIn {
  std::string user;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  double lat = 0.0;
  double lon = 0.0;
  std::string location;

  friend bool operator==(const RawCheckIn&, const RawCheckIn&) = default;
};

using RawEdge = std::pair<std::string, std::string>;

// Orders raw ids numerically when both are unsigned integers, otherwise
// lexicographically, so vocabularies come out as 0, 1, 2, ..., 10.
struct RawIdLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

using UserRows = std::map<std::string, std::vector<RawCheckIn>, RawIdLess>;

// "2010-10-19T23:55:27Z", "2010-10-19 23:55:27" and the same without the
// trailing Z are all read as UTC. Throws ParseError (line 0) on failure.
std::int64_t parse_utc_timestamp(std::string_view text);
std::string format_utc_timestamp(std::int64_t epoch_seconds);

// One check-in per line: user, time, latitude, longitude, location, separated
// by tabs. Blank lines are skipped. Errors carry the 1-based line number.
std::vector<RawCheckIn> parse_checkins(std::istream& in, CheckinFormat format);
std::vector<RawCheckIn> parse_checkins(const std::filesystem::path& path, CheckinFormat format);

// Two tab-separated user ids per line.
std::vector<RawEdge> parse_edges(std::istream& in);
std::vector<RawEdge> parse_edges(const std::filesystem::path& path);

UserRows group_by_user(const std::vector<RawCheckIn>& rows);

struct RegionFilter {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = -180.0;
  double lon_max = 180.0;
  double min_in_region_fraction = 0.1;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
  void validate() const;
};

// Parses "latmin,latmax,lonmin,lonmax".
RegionFilter parse_bbox(std::string_view text);

// Named boxes for the two cities used with the public datasets. They are
// approximate city extents, not the exact regions behind any published counts.
std::optional<RegionFilter> region_preset(std::string_view name);

// Keeps users whose in-region share of check-ins is at least
// min_in_region_fraction; retained users keep only in-region check-ins.
UserRows apply_region_filter(const UserRows& rows, const RegionFilter& filter);

struct ActivityFilter {
  int min_friends = 1;
  int min_checkins = 10;
};

struct ActivityResult {
  UserRows users;
  std::vector<RawEdge> edges;  // undirected, (smaller id, larger id), sorted
};

// Removes users with fewer than min_checkins check-ins or fewer than
// min_friends friends, repeating until no user fails either threshold. Edges
// touching removed or unknown users are dropped.
ActivityResult apply_activity_filter(const UserRows& users, const std::vector<RawEdge>& edges,
                                     const ActivityFilter& filter);

// Keeps the last k_max events.
Trajectory truncate_trajectory(const Trajectory& trajectory, int k_max = kDefaultKMax);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct EdgeSplit {
  EdgeSet train;
  EdgeSet val;
  EdgeSet test;
};

EdgeSplit split_edges(const EdgeSet& edges, const SplitRatios& ratios, std::uint64_t seed);

struct CandidatePool {
  UserId user = 0;
  std::vector<UserId> positives;  // partners in the evaluated split
  std::vector<UserId> negatives;  // sampled users linked to `user` in no split

  friend bool operator==(const CandidatePool&, const CandidatePool&) = default;
};

struct CandidateSet {
  std::string split = "test";
  int per_user = 50;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::vector<CandidatePool> pools;  // ascending by user

  std::size_t num_pairs() const;
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

// Builds one ranking pool per user touching `target`: its partners in
// `target` plus `per_user` distinct users it is not linked to in any split.
// Throws std::runtime_error naming the user if too few such users exist.
CandidateSet sample_eval_candidates(const Dataset& dataset, const EdgeSet& target,
                                    int per_user, std::uint64_t seed);

void write_candidates(const CandidateSet& candidates, std::ostream& out);
void write_candidates(const CandidateSet& candidates, const std::filesystem::path& path);
CandidateSet read_candidates(std::istream& in);
CandidateSet read_candidates(const std::filesystem::path& path);

struct PreprocessConfig {
  CheckinFormat format = CheckinFormat::kGowallaTsv;
  std::optional<RegionFilter> region;  // no region filtering when empty
  ActivityFilter activity;
  int k_max = kDefaultKMax;
  SplitRatios ratios;
  TimeBinning time_binning = TimeBinning::kHourOfDay;
  std::uint64_t seed = 0;
};

struct PreprocessStats {
  std::size_t raw_checkins = 0;
  std::size_t raw_users = 0;
  std::size_t raw_edges = 0;
  std::size_t region_users = 0;
  std::size_t users = 0;
  std::size_t locations = 0;
  std::size_t checkins = 0;  // after truncation
  std::size_t edges = 0;
};

// Region filter, activity filter, chronological sort, truncation to k_max,
// vocabulary construction and the train/val/test split.
Dataset build_dataset(const std::vector<RawCheckIn>& rows, const std::vector<RawEdge>& edges,
                      const PreprocessConfig& config, PreprocessStats* stats = nullptr);

}  // namespace mvmn

#endif  // MVMN_INGESTION_H_
