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

#include "mvmn/analysis.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_set>

#include "mvmn/seeding.h"

namespace mvmn {
namespace {

std::uint64_t pair_key(UserId a, UserId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

template <std::size_t N>
std::optional<double> cosine(const std::array<std::int64_t, N>& a,
                             const std::array<std::int64_t, N>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < N; ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (na == 0 || nb == 0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

TemporalProfile profile(const Trajectory& trajectory) {
  TemporalProfile p;
  const auto& ev = trajectory.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    ++p.frame_hist[hour_of_day_bin(ev[i].timestamp)];
    if (i > 0) {
      const double gap = static_cast<double>(ev[i].timestamp - ev[i - 1].timestamp) / 3600.0;
      ++p.gap_hist[gap_interval_bin(gap)];
    }
  }
  return p;
}

SimilarityStats avg_cosine_similarity(const std::vector<TemporalProfile>& profiles,
                                      const std::vector<std::pair<UserId, UserId>>& pairs,
                                      HistogramKind which) {
  SimilarityStats stats;
  double total = 0;
  for (const auto& [a, b] : pairs) {
    const auto sim = which == HistogramKind::kFrame
                         ? cosine(profiles.at(a).frame_hist, profiles.at(b).frame_hist)
                         : cosine(profiles.at(a).gap_hist, profiles.at(b).gap_hist);
    if (!sim) {
      ++stats.pairs_skipped;
      continue;
    }
    total += *sim;
    ++stats.pairs_used;
  }
  if (stats.pairs_used > 0) stats.mean = total / static_cast<double>(stats.pairs_used);
  return stats;
}

CooccurrenceStats cooccurrence_ratios(const Dataset& dataset, const CooccurrenceOptions& options) {
  if (!(options.window_hours > 0)) throw std::invalid_argument("window must be positive");
  const auto window = static_cast<std::int64_t>(std::llround(options.window_hours * 3600.0));
  if (window <= 0) throw std::invalid_argument("window below one second");

  // location -> (timestamp, user), sorted by time.
  std::vector<std::vector<std::pair<std::int64_t, UserId>>> visits(dataset.num_locations());
  for (const Trajectory& t : dataset.trajectories) {
    for (const CheckIn& c : t.events) visits[c.location].emplace_back(c.timestamp, t.user);
  }
  std::unordered_set<std::uint64_t> spatial;
  std::unordered_set<std::uint64_t> spatio_temporal;
  for (auto& list : visits) {
    std::sort(list.begin(), list.end());
    std::vector<UserId> users;
    for (const auto& v : list) users.push_back(v.second);
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    for (std::size_t i = 0; i < users.size(); ++i) {
      for (std::size_t j = i + 1; j < users.size(); ++j) spatial.insert(pair_key(users[i], users[j]));
    }
    if (options.mode == CooccurrenceWindow::kBucket) {
      std::size_t start = 0;
      while (start < list.size()) {
        const std::int64_t bucket = list[start].first / window;
        std::size_t end = start;
        while (end < list.size() && list[end].first / window == bucket) ++end;
        for (std::size_t i = start; i < end; ++i) {
          for (std::size_t j = i + 1; j < end; ++j) {
            if (list[i].second != list[j].second) {
              spatio_temporal.insert(pair_key(list[i].second, list[j].second));
            }
          }
        }
        start = end;
      }
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size() && list[j].first - list[i].first < window; ++j) {
          if (list[i].second != list[j].second) {
            spatio_temporal.insert(pair_key(list[i].second, list[j].second));
          }
        }
      }
    }
  }
  std::unordered_set<std::uint64_t> links;
  for (const Edge& e : dataset.all_edges()) links.insert(pair_key(e.a, e.b));

  CooccurrenceStats stats;
  stats.n_l = static_cast<std::int64_t>(spatial.size());
  stats.n_lt = static_cast<std::int64_t>(spatio_temporal.size());
  for (auto key : spatial) stats.n_l_s += links.count(key);
  for (auto key : spatio_temporal) stats.n_lt_s += links.count(key);
  if (stats.n_l > 0) stats.sr = static_cast<double>(stats.n_l_s) / static_cast<double>(stats.n_l);
  if (stats.n_lt > 0) {
    stats.str = static_cast<double>(stats.n_lt_s) / static_cast<double>(stats.n_lt);
  }
  return stats;
}

std::vector<std::pair<UserId, UserId>> sample_unlinked_pairs(const Dataset& dataset,
                                                             std::size_t count,
                                                             std::uint64_t seed) {
  const std::size_t n = dataset.num_users();
  std::vector<std::pair<UserId, UserId>> out;
  if (n < 2) return out;
  const std::size_t possible = n * (n - 1) / 2 - dataset.all_edges().size();
  count = std::min(count, possible);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<UserId> pick(0, static_cast<UserId>(n - 1));
  std::unordered_set<std::uint64_t> seen;
  // Rejection sampling; switch to enumeration when the request is dense.
  if (count * 2 > possible) {
    std::vector<std::pair<UserId, UserId>> all;
    for (UserId a = 0; a < static_cast<UserId>(n); ++a) {
      for (UserId b = a + 1; b < static_cast<UserId>(n); ++b) {
        if (!dataset.linked(a, b)) all.emplace_back(a, b);
      }
    }
    std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
    return out;
  }
  while (out.size() < count) {
    UserId a = pick(rng), b = pick(rng);
    if (a == b || dataset.linked(a, b)) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert(pair_key(a, b)).second) out.emplace_back(a, b);
  }
  return out;
}

AnalysisReport analyze(const Dataset& dataset, std::uint64_t seed,
                       const CooccurrenceOptions& options) {
  AnalysisReport report;
  report.cooccurrence = cooccurrence_ratios(dataset, options);
  std::vector<TemporalProfile> profiles;
  profiles.reserve(dataset.num_users());
  for (const Trajectory& t : dataset.trajectories) profiles.push_back(profile(t));
  std::vector<std::pair<UserId, UserId>> linked;
  for (const Edge& e : dataset.all_edges()) linked.emplace_back(e.a, e.b);
  const auto unlinked =
      sample_unlinked_pairs(dataset, 10 * linked.size(), derive_seed(seed, "analysis_unlinked"));
  report.frame_linked = avg_cosine_similarity(profiles, linked, HistogramKind::kFrame);
  report.frame_unlinked = avg_cosine_similarity(profiles, unlinked, HistogramKind::kFrame);
  report.gap_linked = avg_cosine_similarity(profiles, linked, HistogramKind::kGap);
  report.gap_unlinked = avg_cosine_similarity(profiles, unlinked, HistogramKind::kGap);
  return report;
}

}  // namespace mvmn
