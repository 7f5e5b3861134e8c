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

#include "mvmn/relation_match.h"
#include "oracles.h"
#include "test_util.h"

namespace mvmn {
namespace {

using namespace mvmn::testing;  // NOLINT

using ad::Matrix;
using ad::Tape;
using ad::Var;
using mvmn::testing::max_gradient_error;
using mvmn::testing::random_matrix;

TEST(AttentionCoefficient, ZeroAndSelector) {
  Tape tape;
  const int d = 3;
  std::mt19937_64 rng(1);
  Var em = tape.constant(random_matrix(1, d, rng)), en = tape.constant(random_matrix(1, d, rng));
  GatLayer zero{tape.constant(Matrix::Identity(d, d)),
                {GatHead{tape.constant(Matrix::Zero(d, 1)), tape.constant(Matrix::Zero(d, 1)), {}, {}, {}, {}}}};
  EXPECT_EQ(attention_coefficient(em, en, zero, 0).scalar(), 0.0);
  Matrix sel = Matrix::Zero(d, 1);
  sel(1, 0) = 1;
  GatLayer pick{tape.constant(Matrix::Identity(d, d)),
                {GatHead{tape.constant(Matrix::Zero(d, 1)), tape.constant(sel), {}, {}, {}, {}}}};
  EXPECT_EQ(attention_coefficient(em, en, pick, 0).scalar(), en.value()(0, 1));
}

TEST(AttentionCoefficient, MatchesDotProducts) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng() % 6);
    DenseLayer l = random_layer(rng, d, 2);
    Matrix em = random_matrix(1, d, rng), en = random_matrix(1, d, rng);
    Tape tape;
    GatLayer g = bind(tape, l);
    for (std::size_t h = 0; h < 2; ++h) {
      const double want = ((em * l.w) * l.heads[h].first + (en * l.w) * l.heads[h].second)(0, 0);
      EXPECT_NEAR(attention_coefficient(tape.constant(em), tape.constant(en), g, h).scalar(), want, 1e-13);
    }
  }
}

TEST(NeighborWeights, Examples) {
  auto w = neighbor_weights(std::vector<double>{0.4, 0.4, 0.4});
  for (double x : w) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(neighbor_weights(std::vector<double>{-7.0}), std::vector<double>{1.0});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> c(1 + rng() % 8);
    for (double& x : c) x = nd(rng);
    auto a = neighbor_weights(c);
    double total = 0, z = 0;
    for (double x : c) z += std::exp(x > 0 ? x : 0.2 * x);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_GE(a[i], 0.0);
      EXPECT_NEAR(a[i], std::exp(c[i] > 0 ? c[i] : 0.2 * c[i]) / z, 1e-12);
      total += a[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(EdgeAttention, RowsSumToOne) {
  std::mt19937_64 rng(4);
  auto lists = random_graph(rng, 9, 0.3);
  GraphAdjacency adj = make_adjacency(lists);
  DenseLayer l = random_layer(rng, 4, 3);
  Tape tape;
  GatLayer g = bind(tape, l);
  Var projected = ad::matmul(tape.constant(random_matrix(9, 4, rng, -2, 2)), g.w);
  for (const GatHead& head : g.heads) {
    const Matrix a = edge_attention(projected, adj, head).value();
    for (std::size_t u = 0; u < adj.num_nodes(); ++u) {
      double s = 0;
      for (auto i = adj.offsets[u]; i < adj.offsets[u + 1]; ++i) {
        EXPECT_GE(a(i, 0), 0.0);
        s += a(i, 0);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Propagate, MatchesDenseReference) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int d = 1 + static_cast<int>(rng() % 5);
    const int depth = static_cast<int>(rng() % 3);
    const int heads = 1 + static_cast<int>(rng() % 3);
    auto lists = random_graph(rng, n, 0.35);
    Matrix e = random_matrix(n, d, rng);
    std::vector<DenseLayer> layers;
    for (int k = 0; k < depth; ++k) layers.push_back(random_layer(rng, d, heads));
    Tape tape;
    std::vector<GatLayer> bound;
    for (const auto& l : layers) bound.push_back(bind(tape, l));
    const Matrix got = propagate(tape.constant(e), make_adjacency(lists), bound).value();
    Matrix want = e;
    for (const auto& l : layers) want = dense_layer(want, lists, l);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10) << "trial " << t;
  }
}

TEST(Propagate, TrivialCases) {
  std::mt19937_64 rng(6);
  Matrix e = random_matrix(3, 2, rng);
  Tape tape;
  // Isolated nodes, one head, W = I -> ELU(e).
  std::vector<std::vector<UserId>> isolated = {{0}, {1}, {2}};
  GatLayer id{tape.constant(Matrix::Identity(2, 2)),
              {GatHead{tape.constant(random_matrix(2, 1, rng)), tape.constant(random_matrix(2, 1, rng)), {}, {}, {}, {}}}};
  const Matrix out = propagate_layer(tape.constant(e), make_adjacency(isolated), id).value();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double x = e.data()[i];
    EXPECT_NEAR(out.data()[i], x > 0 ? x : std::expm1(x), 1e-15);
  }
  // No layers -> identity.
  EXPECT_EQ(propagate(tape.constant(e), make_adjacency(isolated), {}).value(), e);
  // Identical embeddings stay identical on any graph.
  std::vector<std::vector<UserId>> chain = {{0, 1}, {1, 0, 2}, {2, 1}};
  Matrix same(3, 2);
  same << 0.3, -0.4, 0.3, -0.4, 0.3, -0.4;
  DenseLayer l = random_layer(rng, 2, 3);
  const Matrix o = propagate_layer(tape.constant(same), make_adjacency(chain), bind(tape, l)).value();
  EXPECT_LT((o.row(0) - o.row(2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((o.row(0) - o.row(1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagate, Locality) {
  std::mt19937_64 rng(7);
  // Path 0-1-2-3-4: at depth 2, node 0 does not see node 3.
  std::vector<std::vector<UserId>> path = {{0, 1}, {1, 0, 2}, {2, 1, 3}, {3, 2, 4}, {4, 3}};
  std::vector<DenseLayer> layers = {random_layer(rng, 3, 2), random_layer(rng, 3, 2)};
  Matrix e = random_matrix(5, 3, rng);
  Matrix e2 = e;
  e2.row(3) = random_matrix(1, 3, rng);
  Tape tape;
  std::vector<GatLayer> g = {bind(tape, layers[0]), bind(tape, layers[1])};
  const GraphAdjacency adj = make_adjacency(path);
  const Matrix a = propagate(tape.constant(e), adj, g).value();
  const Matrix b = propagate(tape.constant(e2), adj, g).value();
  EXPECT_EQ(a.row(0), b.row(0));
  EXPECT_NE(a.row(1), b.row(1));
}

TEST(Propagate, GradientsTwoLayersThreeHeads) {
  std::mt19937_64 rng(8);
  auto lists = random_graph(rng, 6, 0.4);
  const GraphAdjacency adj = make_adjacency(lists);
  const int d = 3;
  std::vector<Matrix> inputs = {random_matrix(6, d, rng)};
  for (int k = 0; k < 2; ++k) {
    inputs.push_back(random_matrix(d, d, rng));
    for (int h = 0; h < 3; ++h) {
      inputs.push_back(random_matrix(d, 1, rng));
      inputs.push_back(random_matrix(d, 1, rng));
    }
  }
  auto f = [&](Tape&, const std::vector<Var>& v) {
    std::vector<GatLayer> layers;
    std::size_t i = 1;
    for (int k = 0; k < 2; ++k) {
      GatLayer l{v[i++], {}};
      for (int h = 0; h < 3; ++h) {
        Var s = v[i++];
        Var t = v[i++];
        l.heads.push_back(GatHead{s, t, {}, {}, {}, {}});
      }
      layers.push_back(l);
    }
    return propagate(v[0], adj, layers);
  };
  EXPECT_LT(max_gradient_error(f, inputs), 1e-5);
}

TEST(Propagate, HiddenScorerGradients) {
  std::mt19937_64 rng(9);
  auto lists = random_graph(rng, 5, 0.5);
  const GraphAdjacency adj = make_adjacency(lists);
  const int d = 3, k = 4;
  auto f = [&](Tape&, const std::vector<Var>& v) {
    GatLayer l{v[1], {GatHead{Var(), Var(), v[2], v[3], v[4], v[5]}}};
    return propagate_layer(v[0], adj, l);
  };
  EXPECT_LT(max_gradient_error(f, {random_matrix(5, d, rng), random_matrix(d, d, rng),
                                   random_matrix(d, k, rng), random_matrix(d, k, rng),
                                   random_matrix(1, k, rng), random_matrix(k, 1, rng)}),
            1e-5);
}

TEST(VRel, Examples) {
  Tape tape;
  Var ones = tape.constant(Matrix::Ones(1, 3));
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(v_rel(ones, ones).value()(0, j), 0.7615941559557649, 1e-15);
  EXPECT_EQ(v_rel(ones, tape.constant(Matrix::Zero(1, 3))).value().norm(), 0.0);
  std::mt19937_64 rng(1);
  Var a = tape.constant(random_matrix(1, 5, rng)), b = tape.constant(random_matrix(1, 5, rng));
  EXPECT_EQ(v_rel(a, b).value(), v_rel(b, a).value());
}

TEST(MakeAdjacency, CsrLayout) {
  GraphAdjacency adj = make_adjacency({{0, 2}, {1}, {2, 0}});
  EXPECT_EQ(adj.num_nodes(), 3u);
  EXPECT_EQ(adj.offsets, (std::vector<ad::Index>{0, 2, 3, 5}));
  EXPECT_EQ(adj.neighbors, (std::vector<int>{0, 2, 1, 2, 0}));
  EXPECT_EQ(adj.owners, (std::vector<int>{0, 0, 1, 2, 2}));
}

}  // namespace
}  // namespace mvmn
