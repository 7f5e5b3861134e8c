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

#ifndef MVMN_EVALUATION_H_
#define MVMN_EVALUATION_H_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmn/ingestion.h"
#include "mvmn/model.h"
#include "mvmn/types.h"

namespace mvmn {

struct UserRanking {
  UserId user = 0;
  std::vector<UserId> candidates;
  std::vector<double> scores;
  std::vector<int> labels;  // 1 for a true partner
};

using RankingRun = std::vector<UserRanking>;

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t hits = 0;  // sum over users of positives in the top k
};

// Candidates ranked by score, ties broken by the lower user id. P@k divides
// by k even when a pool is shorter than k. Users without positives are
// skipped for recall but count towards Q_U.
PrecisionRecall precision_recall_at_k(const RankingRun& run, int k = 10);

// Mann-Whitney statistic over all pooled pairs: (concordant + 0.5 tied) /
// (positives * negatives). Throws std::invalid_argument without both classes.
double auc(const RankingRun& run);
double auc(std::span<const double> scores, std::span<const int> labels);
// Mean of per-user AUCs over users with both classes; NaN if there are none.
double auc_per_user(const RankingRun& run);

// Scores every pool pair (user, candidate) in evaluation mode.
RankingRun build_ranking(const Model& model, const CandidateSet& candidates);

struct MetricsReport {
  double auc = 0.0;
  double auc_per_user = 0.0;
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  int k = 10;
  std::size_t users = 0;  // Q_U
  std::size_t pairs = 0;
  std::size_t positives = 0;
};

MetricsReport evaluate(const RankingRun& run, int k = 10);
MetricsReport evaluate(const Model& model, const CandidateSet& candidates, int k = 10);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace mvmn

#endif  // MVMN_EVALUATION_H_
