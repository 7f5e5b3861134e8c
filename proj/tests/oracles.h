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


#ifndef MVMN_TESTS_ORACLES_H_
#define MVMN_TESTS_ORACLES_H_

// Slow, obviously-correct reference implementations shared by the unit tests
// and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mvmn/autodiff.h"
#include "mvmn/evaluation.h"
#include "mvmn/relation_match.h"
#include "test_util.h"

namespace mvmn::testing {

using ad::Matrix;
using ad::Tape;
using ad::Var;

// Brute-force v_loc: explicit cosine loops and maxima, zero padded.
inline std::vector<double> v_loc_oracle(const Matrix& table, const std::vector<int>& lm,
                                 const std::vector<int>& ln, int k_max) {
  auto cos = [&](int a, int b) {
    double dot = 0, na = 0, nb = 0;
    for (Eigen::Index k = 0; k < table.cols(); ++k) {
      dot += table(a, k) * table(b, k);
      na += table(a, k) * table(a, k);
      nb += table(b, k) * table(b, k);
    }
    return (na == 0 || nb == 0) ? 0.0 : dot / std::sqrt(na * nb);
  };
  std::vector<double> out(2 * k_max, 0.0);
  for (std::size_t i = 0; i < lm.size(); ++i) {
    double best = -2;
    for (int b : ln) best = std::max(best, cos(lm[i], b));
    out[i] = best;
  }
  for (std::size_t j = 0; j < ln.size(); ++j) {
    double best = -2;
    for (int a : lm) best = std::max(best, cos(a, ln[j]));
    out[k_max + j] = best;
  }
  return out;
}

inline double lambda(double a, double omega, double s) { return std::exp(a + omega * s); }

// log(lambda(dt)) - integral_0^dt lambda, with the integral done numerically.
inline double numeric_log_density(double a, double omega, double dt) {
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double s) { return lambda(a, omega, s); }, 0.0, dt, 15, 1e-14);
  return a + omega * dt - integral;
}

struct DenseLayer {
  Matrix w;
  std::vector<std::pair<Matrix, Matrix>> heads;  // (a_src, a_dst)
};

inline std::vector<std::vector<UserId>> random_graph(std::mt19937_64& rng, int n, double p) {
  std::vector<std::vector<UserId>> lists(n);
  for (int u = 0; u < n; ++u) lists[u].push_back(u);
  std::bernoulli_distribution edge(p);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (edge(rng)) {
        lists[u].push_back(v);
        lists[v].push_back(u);
      }
    }
  }
  for (auto& l : lists) std::sort(l.begin() + 1, l.end());
  return lists;
}

inline DenseLayer random_layer(std::mt19937_64& rng, int d, int heads) {
  DenseLayer l{random_matrix(d, d, rng), {}};
  for (int h = 0; h < heads; ++h) l.heads.emplace_back(random_matrix(d, 1, rng), random_matrix(d, 1, rng));
  return l;
}

inline GatLayer bind(Tape& tape, const DenseLayer& l) {
  GatLayer g{tape.constant(l.w), {}};
  for (const auto& [s, d] : l.heads) g.heads.push_back(GatHead{tape.constant(s), tape.constant(d), {}, {}, {}, {}});
  return g;
}

// Dense reference: adjacency matrix, full coefficient matrix, masked softmax.
inline Matrix dense_layer(const Matrix& e, const std::vector<std::vector<UserId>>& lists, const DenseLayer& l) {
  const Eigen::Index n = e.rows(), d = e.cols();
  Matrix adj = Matrix::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (UserId v : lists[u]) adj(u, v) = 1;
  }
  const Matrix p = e * l.w;
  Matrix out = Matrix::Zero(n, d);
  for (const auto& [a_src, a_dst] : l.heads) {
    Matrix alpha = Matrix::Zero(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
      double z = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (adj(m, k) == 0) continue;
        double c = 0;
        for (Eigen::Index j = 0; j < d; ++j) c += p(m, j) * a_src(j, 0) + p(k, j) * a_dst(j, 0);
        c = c > 0 ? c : 0.2 * c;
        alpha(m, k) = std::exp(c);
        z += alpha(m, k);
      }
      alpha.row(m) /= z;
    }
    Matrix agg = alpha * p;
    for (Eigen::Index i = 0; i < agg.size(); ++i) {
      const double x = agg.data()[i];
      agg.data()[i] = x > 0 ? x : std::expm1(x);
    }
    out += agg;
  }
  return out / static_cast<double>(l.heads.size());
}

inline UserRanking ranking(UserId user, std::vector<double> scores, std::vector<int> labels) {
  UserRanking r;
  r.user = user;
  for (std::size_t i = 0; i < scores.size(); ++i) r.candidates.push_back(static_cast<UserId>(100 + i));
  r.scores = std::move(scores);
  r.labels = std::move(labels);
  return r;
}

inline RankingRun random_run(std::mt19937_64& rng, int users, int max_candidates, bool coarse) {
  RankingRun run;
  for (int u = 0; u < users; ++u) {
    UserRanking r;
    r.user = u;
    const int n = 1 + static_cast<int>(rng() % max_candidates);
    std::vector<UserId> ids(200);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int i = 0; i < n; ++i) {
      r.candidates.push_back(ids[i]);
      // Coarse scores create many ties.
      r.scores.push_back(coarse ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>()(rng));
      r.labels.push_back(rng() % 4 == 0);
    }
    run.push_back(r);
  }
  return run;
}

// Sort by (score desc, id asc) with a plain insertion sort and count.
inline PrecisionRecall brute_pr(const RankingRun& run, int k) {
  double hits_total = 0, recall = 0;
  for (const UserRanking& r : run) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      std::size_t pos = idx.size();
      while (pos > 0) {
        const std::size_t j = idx[pos - 1];
        const bool before = r.scores[i] > r.scores[j] ||
                            (r.scores[i] == r.scores[j] && r.candidates[i] < r.candidates[j]);
        if (!before) break;
        --pos;
      }
      idx.insert(idx.begin() + static_cast<std::ptrdiff_t>(pos), i);
    }
    int hits = 0, positives = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) hits += (static_cast<int>(i) < k && r.labels[idx[i]] == 1);
    for (int l : r.labels) positives += l;
    hits_total += hits;
    if (positives > 0) recall += static_cast<double>(hits) / positives;
  }
  PrecisionRecall out;
  out.precision = hits_total / (k * static_cast<double>(run.size()));
  out.recall = recall / static_cast<double>(run.size());
  out.hits = static_cast<std::size_t>(hits_total);
  return out;
}

// All positive/negative pairs, one by one.
inline double brute_auc(const RankingRun& run) {
  std::vector<double> pos, neg;
  for (const auto& r : run) {
    for (std::size_t i = 0; i < r.scores.size(); ++i) (r.labels[i] ? pos : neg).push_back(r.scores[i]);
  }
  double s = 0;
  for (double p : pos) {
    for (double n : neg) s += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return s / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace mvmn::testing

#endif  // MVMN_TESTS_ORACLES_H_
