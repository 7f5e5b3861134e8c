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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mvmn/analysis.h"

namespace mvmn {
namespace {

Dataset random_dataset(std::uint64_t seed, int users, int locations) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  for (int u = 0; u < users; ++u) ds.users.push_back(std::to_string(u));
  for (int l = 0; l < locations; ++l) ds.locations.push_back("l" + std::to_string(l));
  for (UserId u = 0; u < users; ++u) {
    Trajectory t;
    t.user = u;
    std::int64_t ts = static_cast<std::int64_t>(rng() % 20000);
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      t.events.push_back({static_cast<LocationId>(rng() % locations), ts});
      ts += static_cast<std::int64_t>(rng() % 30000);
    }
    ds.trajectories.push_back(t);
  }
  EdgeSet edges;
  for (int i = 0; i < users; ++i) {
    const auto a = static_cast<UserId>(rng() % users), b = static_cast<UserId>(rng() % users);
    if (a != b) edges.push_back(make_edge(a, b));
  }
  normalize(edges);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    (i % 5 == 0 ? ds.test_edges : i % 5 == 1 ? ds.val_edges : ds.train_edges).push_back(edges[i]);
  }
  ds.build_adjacency();
  return ds;
}

CooccurrenceStats brute_force(const Dataset& ds, double window_hours, CooccurrenceWindow mode) {
  const auto w = static_cast<std::int64_t>(std::llround(window_hours * 3600));
  CooccurrenceStats s;
  for (UserId a = 0; a < static_cast<UserId>(ds.num_users()); ++a) {
    for (UserId b = a + 1; b < static_cast<UserId>(ds.num_users()); ++b) {
      bool loc = false, loc_time = false;
      for (const CheckIn& x : ds.trajectories[a].events) {
        for (const CheckIn& y : ds.trajectories[b].events) {
          if (x.location != y.location) continue;
          loc = true;
          const bool close = mode == CooccurrenceWindow::kBucket
                                 ? x.timestamp / w == y.timestamp / w
                                 : std::abs(x.timestamp - y.timestamp) < w;
          loc_time = loc_time || close;
        }
      }
      const bool link = ds.linked(a, b);
      s.n_l += loc;
      s.n_l_s += loc && link;
      s.n_lt += loc_time;
      s.n_lt_s += loc_time && link;
    }
  }
  return s;
}

TEST(Profile, Histograms) {
  Trajectory t{0, {{0, 0}, {0, 1800}, {0, 3600 * 5}, {0, 3600 * 40}}};
  TemporalProfile p = profile(t);
  EXPECT_EQ(p.frame_hist[0], 2);
  EXPECT_EQ(p.frame_hist[5], 1);
  EXPECT_EQ(p.frame_hist[16], 1);
  EXPECT_EQ(p.gap_hist[0], 1);  // 0.5 h
  EXPECT_EQ(p.gap_hist[2], 1);  // 4.5 h
  EXPECT_EQ(p.gap_hist[5], 1);  // 35 h
}

TEST(Cosine, IdenticalAndOrthogonal) {
  std::vector<TemporalProfile> profiles(3);
  profiles[0].frame_hist[3] = 2;
  profiles[1].frame_hist[3] = 5;
  profiles[2].frame_hist[4] = 1;
  SimilarityStats same = avg_cosine_similarity(profiles, {{0, 1}}, HistogramKind::kFrame);
  EXPECT_NEAR(same.mean, 1.0, 1e-15);
  SimilarityStats ortho = avg_cosine_similarity(profiles, {{0, 2}}, HistogramKind::kFrame);
  EXPECT_EQ(ortho.mean, 0.0);
  // Gap histograms are all zero here.
  SimilarityStats none = avg_cosine_similarity(profiles, {{0, 1}}, HistogramKind::kGap);
  EXPECT_EQ(none.pairs_used, 0u);
  EXPECT_EQ(none.pairs_skipped, 1u);
}

TEST(Cooccurrence, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset ds = random_dataset(seed, 25, 6);
    for (auto mode : {CooccurrenceWindow::kBucket, CooccurrenceWindow::kSliding}) {
      for (double w : {0.5, 1.0, 3.0}) {
        CooccurrenceStats got = cooccurrence_ratios(ds, {w, mode});
        CooccurrenceStats want = brute_force(ds, w, mode);
        EXPECT_EQ(got.n_l, want.n_l);
        EXPECT_EQ(got.n_l_s, want.n_l_s);
        EXPECT_EQ(got.n_lt, want.n_lt);
        EXPECT_EQ(got.n_lt_s, want.n_lt_s);
        if (want.n_l > 0) EXPECT_DOUBLE_EQ(*got.sr, double(want.n_l_s) / double(want.n_l));
      }
    }
  }
}

TEST(Cooccurrence, UndefinedRatiosWithoutPairs) {
  Dataset ds;
  ds.users = {"a", "b"};
  ds.locations = {"x", "y"};
  ds.trajectories = {Trajectory{0, {{0, 0}}}, Trajectory{1, {{1, 0}}}};
  ds.build_adjacency();
  CooccurrenceStats s = cooccurrence_ratios(ds);
  EXPECT_EQ(s.n_l, 0);
  EXPECT_FALSE(s.sr.has_value());
  EXPECT_FALSE(s.str.has_value());
  EXPECT_THROW(cooccurrence_ratios(ds, {0.0, CooccurrenceWindow::kBucket}), std::invalid_argument);
}

TEST(UnlinkedPairs, DistinctAndUnlinked) {
  Dataset ds = random_dataset(3, 30, 5);
  auto pairs = sample_unlinked_pairs(ds, 200, 9);
  EXPECT_EQ(pairs.size(), 200u);
  std::set<std::pair<UserId, UserId>> uniq(pairs.begin(), pairs.end());
  EXPECT_EQ(uniq.size(), pairs.size());
  for (auto [a, b] : pairs) {
    EXPECT_LT(a, b);
    EXPECT_FALSE(ds.linked(a, b));
  }
  // Asking for more than exist returns all of them.
  const std::size_t all = 30 * 29 / 2 - ds.all_edges().size();
  EXPECT_EQ(sample_unlinked_pairs(ds, 100000, 9).size(), all);
  EXPECT_EQ(sample_unlinked_pairs(ds, 200, 9), pairs);
}

TEST(Analyze, ReportIsDeterministic) {
  Dataset ds = random_dataset(4, 40, 8);
  AnalysisReport a = analyze(ds, 1);
  AnalysisReport b = analyze(ds, 1);
  EXPECT_EQ(a.frame_unlinked.mean, b.frame_unlinked.mean);
  EXPECT_EQ(a.frame_linked.pairs_used + a.frame_linked.pairs_skipped, ds.all_edges().size());
  EXPECT_EQ(a.cooccurrence.n_l, brute_force(ds, 1.0, CooccurrenceWindow::kBucket).n_l);
}

}  // namespace
}  // namespace mvmn
