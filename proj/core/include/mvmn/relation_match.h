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

#ifndef MVMN_RELATION_MATCH_H_
#define MVMN_RELATION_MATCH_H_

// Social view: multi-head graph attention over the training graph.
//
// Row convention: a user embedding is a 1 x d row e, and the layer transform
// is e W. For a target m with neighborhood N_m (m itself plus its train
// neighbors), head k scores every neighbor n with
//
//   c_mn = a_src . (e_m W) + a_dst . (e_n W)
//
// normalizes alpha_m. = softmax_n(LeakyReLU(c_m.)), and outputs
// ELU(sum_n alpha_mn e_n W). Heads share W and are averaged.

#include <span>
#include <vector>

#include "mvmn/autodiff.h"
#include "mvmn/types.h"

namespace mvmn {

inline constexpr double kGatLeakySlope = 0.2;

// Neighborhoods in CSR form: entries [offsets[m], offsets[m+1]) of
// `neighbors` are N_m, and `owners` repeats m for each of them.
struct GraphAdjacency {
  std::vector<ad::Index> offsets;
  std::vector<int> neighbors;
  std::vector<int> owners;

  std::size_t num_nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

// Every list must start with (or at least contain) its owner.
GraphAdjacency make_adjacency(const std::vector<std::vector<UserId>>& lists);

struct GatHead {
  ad::Var a_src;  // d x 1
  ad::Var a_dst;  // d x 1
  // Optional hidden scoring layer: when valid, c = ELU([e_m W | e_n W] W1 + b1) w2.
  ad::Var score_w_src;  // d x k
  ad::Var score_w_dst;  // d x k
  ad::Var score_b;      // 1 x k
  ad::Var score_out;    // k x 1
};

struct GatLayer {
  ad::Var w;  // d x d
  std::vector<GatHead> heads;
};

// Score of the ordered pair (m, n) under one head; e_m, e_n are 1 x d.
ad::Var attention_coefficient(ad::Var e_m, ad::Var e_n, const GatLayer& layer, std::size_t head);

// softmax(LeakyReLU(c)) over one neighborhood.
std::vector<double> neighbor_weights(std::span<const double> coefficients,
                                     double slope = kGatLeakySlope);

// Attention weights of every adjacency entry (E x 1) for one head, given the
// transformed embeddings `projected` = E W.
ad::Var edge_attention(ad::Var projected, const GraphAdjacency& adjacency, const GatHead& head,
                       double slope = kGatLeakySlope);

ad::Var propagate_layer(ad::Var embeddings, const GraphAdjacency& adjacency,
                        const GatLayer& layer, double slope = kGatLeakySlope);

// Applies the layers in order; with no layers the embeddings pass through.
ad::Var propagate(ad::Var embeddings, const GraphAdjacency& adjacency,
                  std::span<const GatLayer> layers, double slope = kGatLeakySlope);

// tanh(e_m * e_n), elementwise.
ad::Var v_rel(ad::Var e_m, ad::Var e_n);

}  // namespace mvmn

#endif  // MVMN_RELATION_MATCH_H_
