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

#ifndef MVMN_SYNTH_H_
#define MVMN_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mvmn {

// Planted-community location-based social network.
struct SynthConfig {
  int communities = 8;
  int users_per_community = 40;
  int locations_per_community = 30;
  int global_locations = 100;
  double p_in = 0.1;     // edge probability inside a community
  double p_out = 0.002;  // edge probability across communities
  double q = 0.8;        // probability of drawing from the own community pool
  // Probability that an event is replaced by a copy of a random friend's
  // event (same location, up to 30 minutes later).
  double joint_visit_prob = 0.2;
  // Per-community hour-of-day peak; evenly spaced over the day when empty.
  std::vector<double> peak_hours;
  double peak_spread_hours = 1.5;  // std dev of the wrapped normal hour profile
  // Per-community mean inter-event gap in hours; spread linearly between
  // gap_min_hours and gap_max_hours when empty.
  std::vector<double> mean_gap_hours;
  double gap_min_hours = 2.0;
  double gap_max_hours = 6.0;
  int checkins_min = 12;
  int checkins_max = 24;
  std::int64_t start_epoch = 1262304000;  // 2010-01-01T00:00:00Z
  double lat_min = 40.55, lat_max = 40.90, lon_min = -74.05, lon_max = -73.75;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument. p_in > p_out and q > 1/C are only required
  // when there is more than one community.
  void validate() const;
  int num_users() const { return communities * users_per_community; }
  double peak_hour(int community) const;
  double mean_gap(int community) const;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

nlohmann::json to_json(const SynthConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct SynthOutput {
  std::string checkins;  // gowalla_tsv text
  std::string edges;     // one directed line per direction of each edge
  std::vector<int> community;  // per generated user
  std::size_t num_checkins = 0;
  std::size_t num_edges = 0;  // undirected
};

// Byte-identical output for equal configs.
SynthOutput generate(const SynthConfig& config);

}  // namespace mvmn

#endif  // MVMN_SYNTH_H_
