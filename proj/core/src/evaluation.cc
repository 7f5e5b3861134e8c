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

#include "mvmn/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace mvmn {

PrecisionRecall precision_recall_at_k(const RankingRun& run, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  PrecisionRecall out;
  if (run.empty()) return out;
  double recall_sum = 0.0;
  for (const UserRanking& r : run) {
    if (r.candidates.size() != r.scores.size() || r.scores.size() != r.labels.size()) {
      throw std::invalid_argument("ranking of user " + std::to_string(r.user) +
                                  " has mismatched lengths");
    }
    for (double s : r.scores) {
      if (!std::isfinite(s)) throw std::invalid_argument("non-finite score in ranking");
    }
    std::vector<std::size_t> order(r.candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&r](std::size_t a, std::size_t b) {
      if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
      return r.candidates[a] < r.candidates[b];
    });
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) hits += r.labels[order[i]] == 1;
    const auto total = static_cast<std::size_t>(std::count(r.labels.begin(), r.labels.end(), 1));
    out.hits += hits;
    if (total > 0) recall_sum += static_cast<double>(hits) / static_cast<double>(total);
  }
  const double q = static_cast<double>(run.size());
  out.precision = static_cast<double>(out.hits) / (static_cast<double>(k) * q);
  out.recall = recall_sum / q;
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("auc: non-finite score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Walk groups of equal score from low to high.
  std::uint64_t neg_below = 0, pos_total = 0, neg_total = 0;
  std::uint64_t concordant = 0, tied = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    concordant += pos * neg_below;
    tied += pos * neg;
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    i = j;
  }
  if (pos_total == 0 || neg_total == 0) {
    throw std::invalid_argument("auc: need at least one positive and one negative");
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

double auc(const RankingRun& run) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const UserRanking& r : run) {
    scores.insert(scores.end(), r.scores.begin(), r.scores.end());
    labels.insert(labels.end(), r.labels.begin(), r.labels.end());
  }
  return auc(scores, labels);
}

double auc_per_user(const RankingRun& run) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const UserRanking& r : run) {
    const auto pos = std::count(r.labels.begin(), r.labels.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(r.labels.size())) continue;
    sum += auc(r.scores, r.labels);
    ++used;
  }
  return used == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(used);
}

RankingRun build_ranking(const Model& model, const CandidateSet& candidates) {
  std::vector<std::pair<UserId, UserId>> pairs;
  RankingRun run;
  run.reserve(candidates.pools.size());
  for (const CandidatePool& pool : candidates.pools) {
    UserRanking r;
    r.user = pool.user;
    for (UserId v : pool.positives) {
      r.candidates.push_back(v);
      r.labels.push_back(1);
    }
    for (UserId v : pool.negatives) {
      r.candidates.push_back(v);
      r.labels.push_back(0);
    }
    for (UserId v : r.candidates) pairs.emplace_back(pool.user, v);
    run.push_back(std::move(r));
  }
  const std::vector<double> scores = model.score_pairs(pairs);
  std::size_t next = 0;
  for (UserRanking& r : run) {
    r.scores.assign(scores.begin() + static_cast<std::ptrdiff_t>(next),
                    scores.begin() + static_cast<std::ptrdiff_t>(next + r.candidates.size()));
    next += r.candidates.size();
  }
  return run;
}

MetricsReport evaluate(const RankingRun& run, int k) {
  MetricsReport m;
  m.k = k;
  m.users = run.size();
  for (const UserRanking& r : run) {
    m.pairs += r.candidates.size();
    m.positives += static_cast<std::size_t>(std::count(r.labels.begin(), r.labels.end(), 1));
  }
  m.auc = auc(run);
  m.auc_per_user = auc_per_user(run);
  const PrecisionRecall pr = precision_recall_at_k(run, k);
  m.precision_at_k = pr.precision;
  m.recall_at_k = pr.recall;
  return m;
}

MetricsReport evaluate(const Model& model, const CandidateSet& candidates, int k) {
  return evaluate(build_ranking(model, candidates), k);
}

nlohmann::json to_json(const MetricsReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  const std::string k = std::to_string(r.k);
  return nlohmann::json{{"auc", num(r.auc)},
                        {"auc_per_user", num(r.auc_per_user)},
                        {"P@" + k, num(r.precision_at_k)},
                        {"R@" + k, num(r.recall_at_k)},
                        {"k", r.k},
                        {"users", r.users},
                        {"pairs", r.pairs},
                        {"positives", r.positives}};
}

}  // namespace mvmn
