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

#include "mvmn/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include "mvmn/ingestion.h"
#include "mvmn/seeding.h"

namespace mvmn {

namespace {

constexpr double kJointDelaySeconds = 1800.0;
constexpr double kClusterSpreadDeg = 0.01;

struct Event {
  std::int64_t timestamp;
  int location;
};

// Wrapped normal hour-of-day weight, 1 at the peak.
double hour_weight(double hour, double peak, double spread) {
  double w = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double d = hour - peak + 24.0 * k;
    w += std::exp(-d * d / (2 * spread * spread));
  }
  return w;
}

double mean_hour_weight(double peak, double spread) {
  constexpr int kSteps = 2400;
  double sum = 0.0;
  for (int i = 0; i < kSteps; ++i) sum += hour_weight((i + 0.5) * 24.0 / kSteps, peak, spread);
  return sum / kSteps / hour_weight(peak, peak, spread);
}

}  // namespace

double SynthConfig::peak_hour(int c) const {
  if (!peak_hours.empty()) return peak_hours.at(static_cast<std::size_t>(c));
  return 24.0 * c / communities;
}

double SynthConfig::mean_gap(int c) const {
  if (!mean_gap_hours.empty()) return mean_gap_hours.at(static_cast<std::size_t>(c));
  if (communities == 1) return gap_min_hours;
  return gap_min_hours + (gap_max_hours - gap_min_hours) * c / (communities - 1);
}

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("synth config: " + what);
  };
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(communities >= 1, "communities must be >= 1");
  require(users_per_community >= 1, "users_per_community must be >= 1");
  require(locations_per_community >= 0 && global_locations >= 0, "negative pool size");
  require(prob(p_in) && prob(p_out) && prob(q) && prob(joint_visit_prob),
          "probabilities must lie in [0, 1]");
  if (communities > 1) {
    require(p_in > p_out, "p_in must exceed p_out");
    require(q > 1.0 / communities, "q must exceed 1/communities");
  }
  require(q == 0.0 || locations_per_community >= 1, "q > 0 needs community locations");
  require(q == 1.0 || global_locations >= 1, "q < 1 needs global locations");
  require(peak_hours.empty() || peak_hours.size() == static_cast<std::size_t>(communities),
          "peak_hours needs one entry per community");
  require(mean_gap_hours.empty() ||
              mean_gap_hours.size() == static_cast<std::size_t>(communities),
          "mean_gap_hours needs one entry per community");
  for (int c = 0; c < communities; ++c) {
    require(mean_gap(c) > 0.0, "mean gaps must be positive");
    require(peak_hour(c) >= 0.0 && peak_hour(c) < 24.0, "peak hours must be in [0, 24)");
  }
  require(peak_spread_hours > 0.0, "peak_spread_hours must be positive");
  require(checkins_min >= 1 && checkins_min <= checkins_max, "bad check-in range");
  require(start_epoch >= 0, "start_epoch must be >= 0");
  require(lat_min < lat_max && lon_min < lon_max, "empty bounding box");
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"communities", c.communities},
          {"users_per_community", c.users_per_community},
          {"locations_per_community", c.locations_per_community},
          {"global_locations", c.global_locations},
          {"p_in", c.p_in},
          {"p_out", c.p_out},
          {"q", c.q},
          {"joint_visit_prob", c.joint_visit_prob},
          {"peak_hours", c.peak_hours},
          {"peak_spread_hours", c.peak_spread_hours},
          {"mean_gap_hours", c.mean_gap_hours},
          {"gap_min_hours", c.gap_min_hours},
          {"gap_max_hours", c.gap_max_hours},
          {"checkins_min", c.checkins_min},
          {"checkins_max", c.checkins_max},
          {"start_epoch", c.start_epoch},
          {"lat_min", c.lat_min},
          {"lat_max", c.lat_max},
          {"lon_min", c.lon_min},
          {"lon_max", c.lon_max},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("synth config must be a JSON object");
  SynthConfig c;
  const nlohmann::json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("synth config: unknown key '" + key + "'");
  }
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("communities", c.communities);
  get("users_per_community", c.users_per_community);
  get("locations_per_community", c.locations_per_community);
  get("global_locations", c.global_locations);
  get("p_in", c.p_in);
  get("p_out", c.p_out);
  get("q", c.q);
  get("joint_visit_prob", c.joint_visit_prob);
  get("peak_hours", c.peak_hours);
  get("peak_spread_hours", c.peak_spread_hours);
  get("mean_gap_hours", c.mean_gap_hours);
  get("gap_min_hours", c.gap_min_hours);
  get("gap_max_hours", c.gap_max_hours);
  get("checkins_min", c.checkins_min);
  get("checkins_max", c.checkins_max);
  get("start_epoch", c.start_epoch);
  get("lat_min", c.lat_min);
  get("lat_max", c.lat_max);
  get("lon_min", c.lon_min);
  get("lon_max", c.lon_max);
  get("seed", c.seed);
  c.validate();
  return c;
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  const int n = cfg.num_users();
  const int num_locations = cfg.communities * cfg.locations_per_community + cfg.global_locations;
  SynthOutput out;
  out.community.resize(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) out.community[u] = u / cfg.users_per_community;

  // Location coordinates: community pools clustered, global pool uniform.
  std::vector<std::pair<double, double>> coords(static_cast<std::size_t>(num_locations));
  {
    std::mt19937_64 rng(derive_seed(cfg.seed, "synth_locations"));
    std::uniform_real_distribution<double> lat(cfg.lat_min, cfg.lat_max);
    std::uniform_real_distribution<double> lon(cfg.lon_min, cfg.lon_max);
    std::normal_distribution<double> jitter(0.0, kClusterSpreadDeg);
    int next = 0;
    for (int c = 0; c < cfg.communities; ++c) {
      const double clat = lat(rng), clon = lon(rng);
      for (int k = 0; k < cfg.locations_per_community; ++k) {
        coords[next++] = {std::clamp(clat + jitter(rng), cfg.lat_min, cfg.lat_max),
                          std::clamp(clon + jitter(rng), cfg.lon_min, cfg.lon_max)};
      }
    }
    while (next < num_locations) coords[next++] = {lat(rng), lon(rng)};
  }

  // Edges.
  std::vector<std::vector<int>> friends(static_cast<std::size_t>(n));
  {
    std::mt19937_64 rng(derive_seed(cfg.seed, "synth_edges"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double p = out.community[a] == out.community[b] ? cfg.p_in : cfg.p_out;
        if (unit(rng) < p) {
          friends[a].push_back(b);
          friends[b].push_back(a);
          ++out.num_edges;
        }
      }
    }
  }

  // Solo events: thinned Poisson process whose rate follows the community's
  // hour-of-day profile, scaled so the mean accepted gap is the community gap.
  std::vector<std::vector<Event>> solo(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const int c = out.community[u];
    const double peak = cfg.peak_hour(c);
    const double spread = cfg.peak_spread_hours;
    const double peak_w = hour_weight(peak, peak, spread);
    const double rate = 1.0 / (cfg.mean_gap(c) * mean_hour_weight(peak, spread));
    std::mt19937_64 rng(derive_seed(cfg.seed, "synth_user", static_cast<std::uint64_t>(u)));
    std::uniform_int_distribution<int> count(cfg.checkins_min, cfg.checkins_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> gap(rate);
    std::uniform_int_distribution<int> own(0, std::max(0, cfg.locations_per_community - 1));
    std::uniform_int_distribution<int> global(0, std::max(0, cfg.global_locations - 1));
    const double day_offset = static_cast<double>(cfg.start_epoch % 86400) / 3600.0;
    const int total = count(rng);
    double t = unit(rng) * 24.0;  // hours since start
    for (int k = 0; k < total; ++k) {
      do {
        t += gap(rng);
      } while (unit(rng) * peak_w > hour_weight(std::fmod(t + day_offset, 24.0), peak, spread));
      int loc;
      if (unit(rng) < cfg.q) {
        loc = c * cfg.locations_per_community + own(rng);
      } else {
        loc = cfg.communities * cfg.locations_per_community + global(rng);
      }
      solo[u].push_back({cfg.start_epoch + static_cast<std::int64_t>(std::llround(t * 3600.0)), loc});
    }
  }

  // Joint visits copy the friend's solo event closest in time.
  std::vector<std::vector<Event>> events = solo;
  for (int u = 0; u < n; ++u) {
    if (friends[u].empty() || cfg.joint_visit_prob == 0.0) continue;
    std::mt19937_64 rng(derive_seed(cfg.seed, "synth_joint", static_cast<std::uint64_t>(u)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_friend(0, friends[u].size() - 1);
    for (Event& e : events[u]) {
      if (unit(rng) >= cfg.joint_visit_prob) continue;
      const auto& other = solo[friends[u][pick_friend(rng)]];
      const Event* src = &other.front();
      for (const Event& cand : other) {
        if (std::llabs(cand.timestamp - e.timestamp) < std::llabs(src->timestamp - e.timestamp)) {
          src = &cand;
        }
      }
      e = {src->timestamp + static_cast<std::int64_t>(unit(rng) * kJointDelaySeconds),
           src->location};
    }
    std::stable_sort(events[u].begin(), events[u].end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  }

  std::string& text = out.checkins;
  char line[160];
  for (int u = 0; u < n; ++u) {
    for (const Event& e : events[u]) {
      const auto& [lat, lon] = coords[e.location];
      std::snprintf(line, sizeof line, "%d\t%s\t%.6f\t%.6f\t%d\n", u,
                    format_utc_timestamp(e.timestamp).c_str(), lat, lon, e.location);
      text += line;
      ++out.num_checkins;
    }
  }
  for (int u = 0; u < n; ++u) {
    for (int v : friends[u]) {
      std::snprintf(line, sizeof line, "%d\t%d\n", u, v);
      out.edges += line;
    }
  }
  return out;
}

}  // namespace mvmn
