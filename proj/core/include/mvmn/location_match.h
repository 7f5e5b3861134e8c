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

#ifndef MVMN_LOCATION_MATCH_H_
#define MVMN_LOCATION_MATCH_H_

#include <span>

#include "mvmn/autodiff.h"
#include "mvmn/types.h"

namespace mvmn {

// Cosine similarity; 0 if either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Pairwise cosine matrix (l_m x l_n) of two sets of embedding rows.
ad::Var similarity_matrix(ad::Var rows_m, ad::Var rows_n);

struct MatchVectors {
  ad::Var s_m;  // l_m x 1, row-wise max of S
  ad::Var s_n;  // 1 x l_n, column-wise max of S
};

// Looks both location sequences up in `location_embeddings`, builds S and
// max-pools it along each axis.
MatchVectors match_vectors(ad::Var location_embeddings, std::span<const int> locations_m,
                           std::span<const int> locations_n);

// [s_m padded to k_max | s_n padded to k_max] as a 1 x 2*k_max row. Padding is
// zero and receives no gradient. Throws std::invalid_argument if either
// sequence is longer than k_max.
ad::Var v_loc(const MatchVectors& s, int k_max);

// Location ids of a trajectory in event order.
std::vector<int> location_sequence(const Trajectory& trajectory);

}  // namespace mvmn

#endif  // MVMN_LOCATION_MATCH_H_
