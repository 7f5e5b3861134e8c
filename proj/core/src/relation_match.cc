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

#include "mvmn/relation_match.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvmn {

using ad::Var;

GraphAdjacency make_adjacency(const std::vector<std::vector<UserId>>& lists) {
  GraphAdjacency adj;
  adj.offsets.push_back(0);
  for (std::size_t m = 0; m < lists.size(); ++m) {
    const auto& list = lists[m];
    if (std::find(list.begin(), list.end(), static_cast<UserId>(m)) == list.end()) {
      throw std::invalid_argument("neighborhood of node " + std::to_string(m) +
                                  " lacks its self loop");
    }
    for (UserId n : list) {
      if (n < 0 || static_cast<std::size_t>(n) >= lists.size()) {
        throw std::invalid_argument("neighbor id out of range");
      }
      adj.neighbors.push_back(n);
      adj.owners.push_back(static_cast<int>(m));
    }
    adj.offsets.push_back(static_cast<ad::Index>(adj.neighbors.size()));
  }
  return adj;
}

namespace {

bool has_hidden_scorer(const GatHead& head) { return head.score_out.valid(); }

// Edge scores c for all adjacency entries (E x 1).
Var edge_scores(Var projected, const GraphAdjacency& adj, const GatHead& head) {
  if (!has_hidden_scorer(head)) {
    Var src = ad::matmul(projected, head.a_src);
    Var dst = ad::matmul(projected, head.a_dst);
    return ad::add(ad::gather_rows(src, adj.owners), ad::gather_rows(dst, adj.neighbors));
  }
  Var src = ad::matmul(projected, head.score_w_src);
  Var dst = ad::matmul(projected, head.score_w_dst);
  Var hidden = ad::elu(ad::add_row(
      ad::add(ad::gather_rows(src, adj.owners), ad::gather_rows(dst, adj.neighbors)),
      head.score_b));
  return ad::matmul(hidden, head.score_out);
}

}  // namespace

Var attention_coefficient(Var e_m, Var e_n, const GatLayer& layer, std::size_t head) {
  if (head >= layer.heads.size()) throw std::out_of_range("attention head index");
  const GatHead& h = layer.heads[head];
  Var pm = ad::matmul(e_m, layer.w);
  Var pn = ad::matmul(e_n, layer.w);
  if (!has_hidden_scorer(h)) return ad::add(ad::matmul(pm, h.a_src), ad::matmul(pn, h.a_dst));
  Var hidden = ad::elu(ad::add_row(
      ad::add(ad::matmul(pm, h.score_w_src), ad::matmul(pn, h.score_w_dst)), h.score_b));
  return ad::matmul(hidden, h.score_out);
}

std::vector<double> neighbor_weights(std::span<const double> coefficients, double slope) {
  if (coefficients.empty()) throw std::invalid_argument("neighbor_weights: empty neighborhood");
  std::vector<double> z(coefficients.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = coefficients[i] > 0 ? coefficients[i] : slope * coefficients[i];
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0;
  for (double& v : z) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

Var edge_attention(Var projected, const GraphAdjacency& adjacency, const GatHead& head,
                   double slope) {
  return ad::segment_softmax(ad::leaky_relu(edge_scores(projected, adjacency, head), slope),
                             adjacency.offsets);
}

Var propagate_layer(Var embeddings, const GraphAdjacency& adjacency, const GatLayer& layer,
                    double slope) {
  if (static_cast<std::size_t>(embeddings.rows()) != adjacency.num_nodes()) {
    throw ad::ShapeError("propagate_layer: embedding rows do not match adjacency");
  }
  if (layer.heads.empty()) throw std::invalid_argument("GAT layer needs at least one head");
  Var projected = ad::matmul(embeddings, layer.w);
  Var messages = ad::gather_rows(projected, adjacency.neighbors);
  Var total;
  for (const GatHead& head : layer.heads) {
    Var alpha = edge_attention(projected, adjacency, head, slope);
    Var out = ad::elu(ad::segment_sum(ad::scale_rows(messages, alpha), adjacency.offsets));
    total = total.valid() ? ad::add(total, out) : out;
  }
  if (layer.heads.size() == 1) return total;
  return ad::scale(total, 1.0 / static_cast<double>(layer.heads.size()));
}

Var propagate(Var embeddings, const GraphAdjacency& adjacency, std::span<const GatLayer> layers,
              double slope) {
  Var current = embeddings;
  for (const GatLayer& layer : layers) current = propagate_layer(current, adjacency, layer, slope);
  return current;
}

Var v_rel(Var e_m, Var e_n) { return ad::tanh(ad::hadamard(e_m, e_n)); }

}  // namespace mvmn
