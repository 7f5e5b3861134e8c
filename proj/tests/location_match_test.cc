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

#include <gtest/gtest.h>

#include "mvmn/location_match.h"
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

TEST(Cosine, Basics) {
  const std::vector<double> a = {1, 0}, b = {0, 2}, c = {3, 0}, z = {0, 0};
  EXPECT_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, c), 1.0);
  EXPECT_EQ(cosine(a, z), 0.0);
}

TEST(VLoc, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const int locations = 2 + static_cast<int>(rng() % 12);
    const int k_max = 1 + static_cast<int>(rng() % 10);
    Matrix table = random_matrix(locations, 1 + static_cast<int>(rng() % 6), rng);
    std::vector<int> lm(1 + rng() % k_max), ln(1 + rng() % k_max);
    for (int& x : lm) x = static_cast<int>(rng() % locations);
    for (int& x : ln) x = static_cast<int>(rng() % locations);
    Tape tape;
    Var v = v_loc(match_vectors(tape.constant(table), lm, ln), k_max);
    ASSERT_EQ(v.rows(), 1);
    ASSERT_EQ(v.cols(), 2 * k_max);
    const auto want = v_loc_oracle(table, lm, ln, k_max);
    for (int i = 0; i < 2 * k_max; ++i) EXPECT_NEAR(v.value()(0, i), want[i], 1e-12);
  }
}

TEST(VLoc, IdenticalSequencesGiveOnes) {
  std::mt19937_64 rng(2);
  Matrix table = random_matrix(5, 4, rng);
  const std::vector<int> seq = {0, 3, 3, 1};
  Tape tape;
  Var v = v_loc(match_vectors(tape.constant(table), seq, seq), 6);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(v.value()(0, i), 1.0, 1e-15);
    EXPECT_NEAR(v.value()(0, 6 + i), 1.0, 1e-15);
  }
  EXPECT_EQ(v.value()(0, 4), 0.0);
  EXPECT_EQ(v.value()(0, 11), 0.0);
  EXPECT_LE(v.value().maxCoeff(), 1.0 + 1e-15);
}

TEST(VLoc, RejectsOverlongSequences) {
  Tape tape;
  Var table = tape.constant(Matrix::Ones(3, 2));
  const std::vector<int> lm = {0, 1, 2};
  const std::vector<int> ln = {0};
  EXPECT_THROW(v_loc(match_vectors(table, lm, ln), 2), std::invalid_argument);
}

TEST(VLoc, GradientWrtEmbeddings) {
  std::mt19937_64 rng(4);
  const std::vector<int> lm = {0, 2, 1}, ln = {3, 2, 4, 0};
  auto f = [&](Tape&, const std::vector<Var>& v) { return v_loc(match_vectors(v[0], lm, ln), 5); };
  EXPECT_LT(max_gradient_error(f, {random_matrix(5, 3, rng)}), 1e-6);
  auto sim = [&](Tape&, const std::vector<Var>& v) { return similarity_matrix(v[0], v[1]); };
  EXPECT_LT(max_gradient_error(sim, {random_matrix(3, 4, rng), random_matrix(2, 4, rng)}), 1e-6);
}

TEST(LocationSequence, EventOrder) {
  Trajectory t{0, {{4, 0}, {2, 10}, {4, 20}}};
  EXPECT_EQ(location_sequence(t), (std::vector<int>{4, 2, 4}));
}

}  // namespace
}  // namespace mvmn
