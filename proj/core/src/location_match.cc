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

#include "mvmn/location_match.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mvmn {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: length mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

ad::Var similarity_matrix(ad::Var rows_m, ad::Var rows_n) {
  return ad::matmul(ad::row_normalize(rows_m), ad::transpose(ad::row_normalize(rows_n)));
}

MatchVectors match_vectors(ad::Var location_embeddings, std::span<const int> locations_m,
                           std::span<const int> locations_n) {
  if (locations_m.empty() || locations_n.empty()) {
    throw std::invalid_argument("match_vectors: empty location sequence");
  }
  ad::Var s = similarity_matrix(ad::gather_rows(location_embeddings, locations_m),
                                ad::gather_rows(location_embeddings, locations_n));
  return {ad::max_over_axis(s, 1), ad::max_over_axis(s, 0)};
}

ad::Var v_loc(const MatchVectors& s, int k_max) {
  if (s.s_m.rows() > k_max || s.s_n.cols() > k_max) {
    throw std::invalid_argument("v_loc: sequence longer than k_max=" + std::to_string(k_max));
  }
  const ad::Var parts[] = {ad::pad_cols(ad::transpose(s.s_m), k_max), ad::pad_cols(s.s_n, k_max)};
  return ad::concat_cols(parts);
}

std::vector<int> location_sequence(const Trajectory& trajectory) {
  std::vector<int> ids;
  ids.reserve(trajectory.events.size());
  for (const CheckIn& c : trajectory.events) ids.push_back(c.location);
  return ids;
}

}  // namespace mvmn
