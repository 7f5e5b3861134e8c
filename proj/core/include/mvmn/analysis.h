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

#ifndef MVMN_ANALYSIS_H_
#define MVMN_ANALYSIS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mvmn/types.h"

namespace mvmn {

// Hour-of-day and inter-event-gap histograms of one trajectory.
struct TemporalProfile {
  std::array<std::int64_t, kHoursPerDay> frame_hist{};
  std::array<std::int64_t, kGapBins> gap_hist{};
};

TemporalProfile profile(const Trajectory& trajectory);

enum class HistogramKind { kFrame, kGap };

struct SimilarityStats {
  double mean = 0.0;  // 0 when no pair was usable
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // at least one side had an all-zero histogram
};

// Mean cosine similarity of the selected histogram over `pairs`.
SimilarityStats avg_cosine_similarity(const std::vector<TemporalProfile>& profiles,
                                      const std::vector<std::pair<UserId, UserId>>& pairs,
                                      HistogramKind which);

enum class CooccurrenceWindow {
  kBucket,   // same floor(t / window)
  kSliding,  // |t_a - t_b| < window
};

struct CooccurrenceOptions {
  double window_hours = 1.0;
  CooccurrenceWindow mode = CooccurrenceWindow::kBucket;
};

struct CooccurrenceStats {
  std::int64_t n_l = 0;     // pairs sharing a location
  std::int64_t n_l_s = 0;   // ... that are linked
  std::int64_t n_lt = 0;    // pairs sharing a location within one time window
  std::int64_t n_lt_s = 0;  // ... that are linked
  std::optional<double> sr;   // n_l_s / n_l, undefined when n_l == 0
  std::optional<double> str;  // n_lt_s / n_lt, undefined when n_lt == 0
};

// Links are taken from all three splits.
CooccurrenceStats cooccurrence_ratios(const Dataset& dataset, const CooccurrenceOptions& options = {});

// `count` distinct unlinked user pairs drawn uniformly (fewer if the graph is
// too dense to supply them).
std::vector<std::pair<UserId, UserId>> sample_unlinked_pairs(const Dataset& dataset,
                                                             std::size_t count,
                                                             std::uint64_t seed);

struct AnalysisReport {
  CooccurrenceStats cooccurrence;
  SimilarityStats frame_linked;
  SimilarityStats frame_unlinked;
  SimilarityStats gap_linked;
  SimilarityStats gap_unlinked;
};

// Linked pairs are all edges; the unlinked baseline uses 10x as many sampled
// unlinked pairs.
AnalysisReport analyze(const Dataset& dataset, std::uint64_t seed,
                       const CooccurrenceOptions& options = {});

}  // namespace mvmn

#endif  // MVMN_ANALYSIS_H_
