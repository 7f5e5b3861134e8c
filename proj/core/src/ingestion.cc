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

#include "mvmn/ingestion.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mvmn/dataset_io.h"
#include "mvmn/seeding.h"

namespace mvmn {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_unsigned_integer(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

CheckinFormat parse_checkin_format(std::string_view name) {
  if (name == "gowalla_tsv") return CheckinFormat::kGowallaTsv;
  if (name == "foursquare_tsv") return CheckinFormat::kFoursquareTsv;
  throw std::invalid_argument("unknown check-in format '" + std::string(name) + "'");
}

std::string_view format_name(CheckinFormat format) {
  return format == CheckinFormat::kGowallaTsv ? "gowalla_tsv" : "foursquare_tsv";
}

bool RawIdLess::operator()(const std::string& a, const std::string& b) const {
  const bool na = is_unsigned_integer(a);
  const bool nb = is_unsigned_integer(b);
  if (na && nb) {
    // Strip leading zeros, then longer means larger.
    const auto sa = a.find_first_not_of('0');
    const auto sb = b.find_first_not_of('0');
    const std::string_view va = sa == std::string::npos ? "" : std::string_view(a).substr(sa);
    const std::string_view vb = sb == std::string::npos ? "" : std::string_view(b).substr(sb);
    if (va.size() != vb.size()) return va.size() < vb.size();
    if (va != vb) return va < vb;
    return a < b;
  }
  if (na != nb) return na;  // numeric ids first
  return a < b;
}

std::int64_t parse_utc_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  // YYYY-MM-DD[T ]HH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
    throw ParseError("unparseable timestamp '" + std::string(text) + "'", 0);
  }
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_number(text.substr(0, 4), y) || !parse_number(text.substr(5, 2), mo) ||
      !parse_number(text.substr(8, 2), d) || !parse_number(text.substr(11, 2), h) ||
      !parse_number(text.substr(14, 2), mi) || !parse_number(text.substr(17, 2), s)) {
    throw ParseError("unparseable timestamp '" + std::string(text) + "'", 0);
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw ParseError("invalid calendar time '" + std::string(text) + "'", 0);
  }
  const sys_seconds t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return t.time_since_epoch().count();
}

std::string format_utc_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds t{seconds{epoch_seconds}};
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::vector<RawCheckIn> parse_checkins(std::istream& in, CheckinFormat /*format*/) {
  std::vector<RawCheckIn> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw ParseError("expected 5 tab-separated fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    RawCheckIn row;
    row.user = std::string(trim(fields[0]));
    try {
      row.timestamp = parse_utc_timestamp(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (row.timestamp < 0) throw ParseError("timestamp before 1970", line_no);
    if (!parse_number(fields[2], row.lat) || !parse_number(fields[3], row.lon)) {
      throw ParseError("bad coordinates", line_no);
    }
    row.location = std::string(trim(fields[4]));
    if (row.user.empty() || row.location.empty()) throw ParseError("empty id", line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawCheckIn> parse_checkins(const std::filesystem::path& path, CheckinFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_checkins(in, format);
}

std::vector<RawEdge> parse_edges(std::istream& in) {
  std::vector<RawEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError("expected 2 tab-separated user ids", line_no);
    }
    RawEdge e{std::string(trim(fields[0])), std::string(trim(fields[1]))};
    if (e.first.empty() || e.second.empty()) throw ParseError("empty user id", line_no);
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<RawEdge> parse_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_edges(in);
}

UserRows group_by_user(const std::vector<RawCheckIn>& rows) {
  UserRows grouped;
  for (const RawCheckIn& r : rows) grouped[r.user].push_back(r);
  return grouped;
}

void RegionFilter::validate() const {
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
    throw std::invalid_argument("region bounding box is empty");
  }
  if (!(min_in_region_fraction >= 0.0 && min_in_region_fraction <= 1.0)) {
    throw std::invalid_argument("min_in_region_fraction must lie in [0, 1]");
  }
}

RegionFilter parse_bbox(std::string_view text) {
  double v[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = text.find(',', start);
    if ((i < 3) == (comma == std::string_view::npos)) {
      throw std::invalid_argument("bbox must be latmin,latmax,lonmin,lonmax");
    }
    const auto field = text.substr(start, i < 3 ? comma - start : std::string_view::npos);
    if (!parse_number(field, v[i])) throw std::invalid_argument("bad bbox number");
    start = comma + 1;
  }
  RegionFilter f;
  f.lat_min = v[0];
  f.lat_max = v[1];
  f.lon_min = v[2];
  f.lon_max = v[3];
  f.validate();
  return f;
}

std::optional<RegionFilter> region_preset(std::string_view name) {
  if (name == "nyc") return RegionFilter{40.4774, 40.9176, -74.2591, -73.7004, 0.1};
  if (name == "la") return RegionFilter{33.7037, 34.3373, -118.6682, -118.1553, 0.1};
  return std::nullopt;
}

UserRows apply_region_filter(const UserRows& rows, const RegionFilter& filter) {
  UserRows kept;
  for (const auto& [user, list] : rows) {
    if (list.empty()) continue;
    std::vector<RawCheckIn> inside;
    for (const RawCheckIn& r : list) {
      if (filter.contains(r.lat, r.lon)) inside.push_back(r);
    }
    const double fraction = static_cast<double>(inside.size()) / static_cast<double>(list.size());
    if (!inside.empty() && fraction >= filter.min_in_region_fraction) {
      kept.emplace(user, std::move(inside));
    }
  }
  return kept;
}

ActivityResult apply_activity_filter(const UserRows& users, const std::vector<RawEdge>& edges,
                                     const ActivityFilter& filter) {
  std::set<RawEdge> unique;
  for (const auto& [a, b] : edges) {
    if (a == b || !users.count(a) || !users.count(b)) continue;
    unique.insert(RawIdLess{}(a, b) ? RawEdge{a, b} : RawEdge{b, a});
  }
  std::unordered_map<std::string, std::vector<std::string>> neighbors;
  for (const auto& [a, b] : unique) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }
  std::unordered_map<std::string, int> degree;
  for (const auto& [user, list] : users) {
    auto it = neighbors.find(user);
    degree[user] = it == neighbors.end() ? 0 : static_cast<int>(it->second.size());
  }
  std::set<std::string> removed;
  std::deque<std::string> queue;
  for (const auto& [user, list] : users) {
    if (static_cast<int>(list.size()) < filter.min_checkins || degree[user] < filter.min_friends) {
      removed.insert(user);
      queue.push_back(user);
    }
  }
  while (!queue.empty()) {
    const std::string user = queue.front();
    queue.pop_front();
    auto it = neighbors.find(user);
    if (it == neighbors.end()) continue;
    for (const std::string& other : it->second) {
      if (removed.count(other)) continue;
      if (--degree[other] < filter.min_friends) {
        removed.insert(other);
        queue.push_back(other);
      }
    }
  }
  ActivityResult result;
  for (const auto& [user, list] : users) {
    if (!removed.count(user)) result.users.emplace(user, list);
  }
  for (const auto& e : unique) {
    if (!removed.count(e.first) && !removed.count(e.second)) result.edges.push_back(e);
  }
  return result;
}

Trajectory truncate_trajectory(const Trajectory& trajectory, int k_max) {
  if (k_max <= 0) throw std::invalid_argument("k_max must be positive");
  Trajectory out;
  out.user = trajectory.user;
  const std::size_t keep = std::min(trajectory.events.size(), static_cast<std::size_t>(k_max));
  out.events.assign(trajectory.events.end() - static_cast<std::ptrdiff_t>(keep),
                    trajectory.events.end());
  return out;
}

EdgeSplit split_edges(const EdgeSet& edges, const SplitRatios& ratios, std::uint64_t seed) {
  const double total = ratios.train + ratios.val + ratios.test;
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }
  EdgeSet shuffled = edges;
  normalize(shuffled);
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t n = shuffled.size();
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n)));
  const auto n_test = std::min(
      n - n_val, static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(n))));
  EdgeSplit split;
  split.val.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val),
                    shuffled.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  split.train.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val + n_test),
                     shuffled.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::size_t CandidateSet::num_pairs() const {
  std::size_t n = 0;
  for (const auto& p : pools) n += p.positives.size() + p.negatives.size();
  return n;
}

CandidateSet sample_eval_candidates(const Dataset& dataset, const EdgeSet& target, int per_user,
                                    std::uint64_t seed) {
  if (per_user < 0) throw std::invalid_argument("per_user must be non-negative");
  std::map<UserId, std::vector<UserId>> positives;
  for (const Edge& e : target) {
    positives[e.a].push_back(e.b);
    positives[e.b].push_back(e.a);
  }
  const auto n = static_cast<UserId>(dataset.num_users());
  std::vector<std::vector<UserId>> linked(dataset.num_users());
  for (const Edge& e : dataset.all_edges()) {
    linked[e.a].push_back(e.b);
    linked[e.b].push_back(e.a);
  }
  CandidateSet set;
  set.per_user = per_user;
  set.seed = seed;
  set.dataset_fingerprint = dataset_fingerprint(dataset);
  std::mt19937_64 rng(derive_seed(seed, "eval_candidates"));
  std::vector<char> excluded(dataset.num_users(), 0);
  for (auto& [user, pos] : positives) {
    for (UserId v : linked[user]) excluded[v] = 1;
    excluded[user] = 1;
    std::vector<UserId> eligible;
    for (UserId v = 0; v < n; ++v) {
      if (!excluded[v]) eligible.push_back(v);
    }
    for (UserId v : linked[user]) excluded[v] = 0;
    excluded[user] = 0;
    if (eligible.size() < static_cast<std::size_t>(per_user)) {
      throw std::runtime_error("user " + dataset.users[user] + " has only " +
                               std::to_string(eligible.size()) + " unlinked users, need " +
                               std::to_string(per_user));
    }
    CandidatePool pool;
    pool.user = user;
    pool.positives = pos;
    std::sort(pool.positives.begin(), pool.positives.end());
    std::sample(eligible.begin(), eligible.end(), std::back_inserter(pool.negatives), per_user,
                rng);
    set.pools.push_back(std::move(pool));
  }
  return set;
}

void write_candidates(const CandidateSet& candidates, std::ostream& out) {
  json pools = json::array();
  for (const CandidatePool& p : candidates.pools) {
    pools.push_back({{"user", p.user}, {"positives", p.positives}, {"negatives", p.negatives}});
  }
  json j = {{"format", "mvmn-candidates"},
            {"version", 1},
            {"split", candidates.split},
            {"per_user", candidates.per_user},
            {"seed", candidates.seed},
            {"dataset_fingerprint", candidates.dataset_fingerprint},
            {"pools", pools}};
  out << j.dump() << '\n';
}

void write_candidates(const CandidateSet& candidates, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_candidates(candidates, out);
}

CandidateSet read_candidates(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("candidates file is not valid JSON", 0);
  try {
    if (j.at("format").get<std::string>() != "mvmn-candidates") {
      throw ParseError("not an mvmn-candidates file", 0);
    }
    CandidateSet set;
    set.split = j.at("split").get<std::string>();
    set.per_user = j.at("per_user").get<int>();
    set.seed = j.at("seed").get<std::uint64_t>();
    set.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    for (const auto& p : j.at("pools")) {
      CandidatePool pool;
      pool.user = p.at("user").get<UserId>();
      pool.positives = p.at("positives").get<std::vector<UserId>>();
      pool.negatives = p.at("negatives").get<std::vector<UserId>>();
      set.pools.push_back(std::move(pool));
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), 0);
  }
}

CandidateSet read_candidates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_candidates(in);
}

Dataset build_dataset(const std::vector<RawCheckIn>& rows, const std::vector<RawEdge>& edges,
                      const PreprocessConfig& config, PreprocessStats* stats) {
  PreprocessStats st;
  st.raw_checkins = rows.size();
  st.raw_edges = edges.size();
  UserRows grouped = group_by_user(rows);
  st.raw_users = grouped.size();
  if (config.region) {
    config.region->validate();
    grouped = apply_region_filter(grouped, *config.region);
  }
  st.region_users = grouped.size();
  ActivityResult active = apply_activity_filter(grouped, edges, config.activity);

  Dataset ds;
  ds.time_binning = config.time_binning;
  ds.k_max = config.k_max;
  std::unordered_map<std::string, UserId> user_index;
  for (const auto& [user, list] : active.users) {
    user_index.emplace(user, static_cast<UserId>(ds.users.size()));
    ds.users.push_back(user);
  }
  // Truncate first so the location vocabulary only holds visited-and-kept ids.
  std::vector<std::vector<const RawCheckIn*>> kept(ds.users.size());
  std::set<std::string, RawIdLess> location_names;
  for (const auto& [user, list] : active.users) {
    std::vector<const RawCheckIn*> sorted;
    for (const RawCheckIn& r : list) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const RawCheckIn* a, const RawCheckIn* b) {
      return a->timestamp < b->timestamp;
    });
    const std::size_t keep = std::min(sorted.size(), static_cast<std::size_t>(config.k_max));
    sorted.erase(sorted.begin(), sorted.end() - static_cast<std::ptrdiff_t>(keep));
    for (const RawCheckIn* r : sorted) location_names.insert(r->location);
    kept[user_index.at(user)] = std::move(sorted);
  }
  std::unordered_map<std::string, LocationId> location_index;
  for (const std::string& name : location_names) {
    location_index.emplace(name, static_cast<LocationId>(ds.locations.size()));
    ds.locations.push_back(name);
  }
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    Trajectory t;
    t.user = static_cast<UserId>(u);
    for (const RawCheckIn* r : kept[u]) {
      t.events.push_back({location_index.at(r->location), r->timestamp});
      ++st.checkins;
    }
    ds.trajectories.push_back(std::move(t));
  }
  EdgeSet all;
  for (const auto& [a, b] : active.edges) all.push_back(make_edge(user_index.at(a), user_index.at(b)));
  normalize(all);
  EdgeSplit split = split_edges(all, config.ratios, derive_seed(config.seed, "split"));
  ds.train_edges = std::move(split.train);
  ds.val_edges = std::move(split.val);
  ds.test_edges = std::move(split.test);
  ds.build_adjacency();

  json prov = {{"format", format_name(config.format)},
               {"k_max", config.k_max},
               {"min_friends", config.activity.min_friends},
               {"min_checkins", config.activity.min_checkins},
               {"split", {config.ratios.train, config.ratios.val, config.ratios.test}},
               {"seed", config.seed}};
  if (config.region) {
    prov["bbox"] = {config.region->lat_min, config.region->lat_max, config.region->lon_min,
                    config.region->lon_max};
    prov["min_fraction"] = config.region->min_in_region_fraction;
  }
  ds.provenance = prov.dump();
  ds.validate();

  st.users = ds.num_users();
  st.locations = ds.num_locations();
  st.edges = all.size();
  if (stats) *stats = st;
  return ds;
}

}  // namespace mvmn
