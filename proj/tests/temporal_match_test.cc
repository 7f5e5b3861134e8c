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

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "mvmn/temporal_match.h"
#include "oracles.h"
#include "test_util.h"

namespace mvmn {
namespace {

using namespace mvmn::testing;  // NOLINT

using ad::Index;
using ad::Matrix;
using ad::Tape;
using ad::Var;
using mvmn::testing::max_gradient_error;
using mvmn::testing::random_matrix;

TEST(Intensity, Examples) {
  EXPECT_DOUBLE_EQ(intensity(0.0, 3.0, -1.7, 0.0) , std::exp(-5.1));
  EXPECT_EQ(intensity(0.0, 0.0, 5.0, 0.0), 1.0);
  EXPECT_NEAR(intensity(0.5, 2.0, 0.1, -0.2), 1.6487212707001282, 1e-15);
  // Clamped exponent.
  EXPECT_EQ(intensity(100.0, 0.0, 0.0, 0.0), std::exp(kExpClamp));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 10);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = a + u(rng);
    EXPECT_LE(intensity(0.3, a, 0.4, -1), intensity(0.3, b, 0.4, -1));
  }
}

TEST(LogDensity, ClosedFormExample) {
  const double lf = log_density(0.0, 1.0, 1.0, 0.0);
  EXPECT_NEAR(lf, 2.0 - std::exp(1.0), 1e-15);
  EXPECT_NEAR(lf, -0.71828, 1e-5);
  EXPECT_NEAR(std::exp(lf), 0.48759, 1e-5);
  EXPECT_NEAR(lf, numeric_log_density(0.0, 1.0, 1.0), 1e-12);
}

TEST(LogDensity, ZeroGapIsLogIntensity) {
  for (double w : {-1.0, 1e-9, 0.0, 2.0}) EXPECT_NEAR(log_density(0.7, 0.0, w, -0.2), 0.5, 1e-15);
}

TEST(LogDensity, AgreesWithQuadratureOnRandomDraws) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> wd(-2, 2), ad_(-1.5, 1.5), dtd(0, 4);
  for (int i = 0; i < 100; ++i) {
    double w = wd(rng);
    if (i % 10 == 0) w = (i % 20 == 0 ? 1 : -1) * 1e-7 * (1 + i);
    if (i == 5) w = 0.0;
    const double a = ad_(rng), dt = dtd(rng);
    EXPECT_NEAR(log_density(a, dt, w, 0.0), numeric_log_density(a, w, dt), 1e-6)
        << "omega " << w << " a " << a << " dt " << dt;
  }
}

TEST(LogDensity, LimitBranchIsContinuous) {
  for (double dt : {0.3, 1.0, 5.0}) {
    const double limit = log_density(0.2, dt, 1e-9, 0.1);
    const double outside = log_density(0.2, dt, 2e-6, 0.1);
    EXPECT_NEAR(limit, 0.3 + 1e-9 * dt - dt * std::exp(0.3) * (1 + 0.5e-9 * dt), 1e-13);
    EXPECT_NEAR(limit, 0.3 - dt * std::exp(0.3), 1e-7);
    EXPECT_NEAR(limit, outside, 1e-4);
  }
}

TEST(LogDensity, ProperForPositiveOmega) {
  boost::math::quadrature::exp_sinh<double> integrator;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wd(0.05, 2), ad_(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const double w = wd(rng), a = ad_(rng);
    const double mass =
        integrator.integrate([&](double s) { return std::exp(log_density(a, s, w, 0.0)); });
    EXPECT_NEAR(mass, 1.0, 1e-3) << "omega " << w;
  }
}

TEST(LogDensity, DefectiveForNegativeOmega) {
  // CDF F(t) = 1 - exp(-(e^a/w)(e^{w t} - 1)) stays below 1 and increases.
  const double a = 0.0, w = -0.8;
  double prev = 0;
  for (double t = 0.5; t <= 40; t += 0.5) {
    const double cdf = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return std::exp(log_density(a, s, w, 0.0)); }, 0.0, t, 15, 1e-13);
    EXPECT_GE(cdf, prev);
    EXPECT_LT(cdf, 1.0);
    prev = cdf;
  }
  EXPECT_NEAR(prev, 1 - std::exp(-1 / 0.8), 1e-8);
}

TEST(LogDensity, VarMatchesScalarAndGradients) {
  std::mt19937_64 rng(3);
  for (double w : {0.7, -1.3, 3e-7}) {
    const std::vector<double> dt = {0.0, 0.5, 2.0, 3.5};
    Matrix a = random_matrix(4, 1, rng);
    Tape tape;
    Var out = log_density(tape.constant(a), tape.constant(Matrix::Constant(1, 1, w)), dt);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.value()(i, 0), log_density(a(i, 0), dt[i], w, 0), 1e-14);
    auto f = [&](Tape&, const std::vector<Var>& v) { return log_density(v[0], v[1], dt); };
    // Probe step 1e-7 keeps the near-zero omega inside the limit branch.
    EXPECT_LT(max_gradient_error(f, {a, Matrix::Constant(1, 1, w)}, std::abs(w) < 1e-5 ? 1e-7 : 1e-5), 1e-5)
        << "omega " << w;
  }
}

TEST(PpLoss, Examples) {
  Tape tape;
  const Index hd = 3;
  PointProcessVars pp{tape.constant(Matrix::Zero(hd, 1)), tape.constant(Matrix::Ones(1, 1)),
                      tape.constant(Matrix::Zero(1, 1))};
  std::vector<Var> one = {tape.constant(Matrix::Ones(1, hd))};
  std::vector<double> t0 = {5.0};
  EXPECT_EQ(pp_loss(one, t0, one, t0, pp).scalar(), 0.0);

  std::vector<Var> two = {one[0], one[0]};
  std::vector<double> t1 = {2.0, 3.0};
  const double single = pp_loss(two, t1, one, t0, pp).scalar();
  EXPECT_NEAR(single, 0.71828, 1e-5);
  EXPECT_NEAR(pp_loss(two, t1, two, t1, pp).scalar(), 2 * single, 1e-15);

  std::vector<double> bad = {3.0, 2.0};
  EXPECT_THROW(pp_loss(two, bad, one, t0, pp), std::invalid_argument);
}

struct Lstm {
  Matrix table, wx, wh, bias;
};

Lstm random_lstm(std::mt19937_64& rng, int bins, int d, int hd) {
  return {random_matrix(bins, d, rng), random_matrix(d, 4 * hd, rng, -0.5, 0.5),
          random_matrix(hd, 4 * hd, rng, -0.5, 0.5), random_matrix(1, 4 * hd, rng, -0.5, 0.5)};
}

double sig(double x) { return 1 / (1 + std::exp(-x)); }

TEST(Encode, MatchesScalarUnroll) {
  std::mt19937_64 rng(12);
  const int hd = 4, d = 3;
  Lstm p = random_lstm(rng, 24, d, hd);
  TimeSeriesInput s{{3, 7, 7, 0, 23}, {0, 1, 2, 3, 4}};
  Tape tape;
  auto states = encode(s, tape.constant(p.table),
                       ad::LstmWeights{tape.constant(p.wx), tape.constant(p.wh), tape.constant(p.bias)});
  ASSERT_EQ(states.size(), 5u);
  std::vector<double> h(hd, 0), c(hd, 0);
  for (std::size_t t = 0; t < 5; ++t) {
    std::vector<double> z(4 * hd);
    for (int j = 0; j < 4 * hd; ++j) {
      z[j] = p.bias(0, j);
      for (int k = 0; k < d; ++k) z[j] += p.table(s.bins[t], k) * p.wx(k, j);
      for (int k = 0; k < hd; ++k) z[j] += h[k] * p.wh(k, j);
    }
    for (int j = 0; j < hd; ++j) {
      c[j] = sig(z[hd + j]) * c[j] + sig(z[j]) * std::tanh(z[2 * hd + j]);
      h[j] = sig(z[3 * hd + j]) * std::tanh(c[j]);
      EXPECT_NEAR(states[t].value()(0, j), h[j], 1e-14);
    }
  }
}

TEST(Encode, ZeroWeightsAndEmptySeries) {
  Tape tape;
  ad::LstmWeights w{tape.constant(Matrix::Zero(2, 12)), tape.constant(Matrix::Zero(3, 12)),
                    tape.constant(Matrix::Zero(1, 12))};
  TimeSeriesInput s{{1, 2}, {0, 1}};
  for (Var h : encode(s, tape.constant(Matrix::Ones(24, 2)), w)) EXPECT_EQ(h.value().norm(), 0.0);
  TimeSeriesInput empty;
  EXPECT_THROW(encode(empty, tape.constant(Matrix::Ones(24, 2)), w), std::invalid_argument);
}

TEST(EncodeBatch, EqualsPerSeriesEncoding) {
  std::mt19937_64 rng(13);
  const int hd = 5, d = 4;
  Lstm p = random_lstm(rng, 24, d, hd);
  std::vector<TimeSeriesInput> series;
  for (int i = 0; i < 7; ++i) {
    TimeSeriesInput s;
    double t = 0;
    const int len = 1 + static_cast<int>(rng() % 9);
    for (int k = 0; k < len; ++k) {
      s.bins.push_back(static_cast<int>(rng() % 24));
      s.hours.push_back(t);
      t += std::uniform_real_distribution<double>(0, 5)(rng);
    }
    series.push_back(s);
  }
  Tape tape;
  Var table = tape.constant(p.table);
  ad::LstmWeights w{tape.constant(p.wx), tape.constant(p.wh), tape.constant(p.bias)};
  PointProcessVars pp{tape.constant(random_matrix(hd, 1, rng)), tape.constant(Matrix::Constant(1, 1, 0.3)),
                      tape.constant(Matrix::Constant(1, 1, -0.4))};
  std::vector<const TimeSeriesInput*> ptrs;
  for (const auto& s : series) ptrs.push_back(&s);
  BatchEncoding enc = encode_batch(ptrs, table, w, &pp);
  std::vector<Var> no_states;
  std::vector<double> no_hours;
  for (std::size_t i = 0; i < series.size(); ++i) {
    auto states = encode(series[i], table, w);
    EXPECT_LT((enc.final_states.value().row(i) - states.back().value()).cwiseAbs().maxCoeff(), 1e-13);
    const double want = pp_loss(states, series[i].hours, no_states, no_hours, pp).scalar();
    EXPECT_NEAR(enc.neg_log_likelihood.value()(i, 0), want, 1e-11);
  }
}

TEST(EncodeBatch, Gradients) {
  std::mt19937_64 rng(14);
  const int hd = 3, d = 2;
  Lstm p = random_lstm(rng, 6, d, hd);
  std::vector<TimeSeriesInput> series = {{{0, 5, 2}, {0, 0.5, 2.0}}, {{1}, {3}}, {{4, 4}, {1, 1.2}}};
  std::vector<const TimeSeriesInput*> ptrs = {&series[0], &series[1], &series[2]};
  auto f = [&](Tape&, const std::vector<Var>& v) {
    PointProcessVars pp{v[4], v[5], v[6]};
    BatchEncoding e = encode_batch(ptrs, v[0], ad::LstmWeights{v[1], v[2], v[3]}, &pp);
    return ad::concat_cols(std::vector<Var>{e.final_states, e.neg_log_likelihood});
  };
  EXPECT_LT(max_gradient_error(f, {p.table, p.wx, p.wh, p.bias, random_matrix(hd, 1, rng),
                                   Matrix::Constant(1, 1, 0.2), Matrix::Constant(1, 1, -0.1)}),
            1e-5);
}

TEST(VTime, Examples) {
  Tape tape;
  Var ones = tape.constant(Matrix::Ones(1, 4));
  Var zeros = tape.constant(Matrix::Zero(1, 4));
  for (Index j = 0; j < 4; ++j) EXPECT_NEAR(v_time(ones, ones).value()(0, j), 0.7615941559557649, 1e-15);
  EXPECT_EQ(v_time(ones, zeros).value().norm(), 0.0);
  std::mt19937_64 rng(2);
  Var a = tape.constant(random_matrix(1, 6, rng, -3, 3)), b = tape.constant(random_matrix(1, 6, rng, -3, 3));
  EXPECT_EQ(v_time(a, b).value(), v_time(b, a).value());
  EXPECT_LE(v_time(a, b).value().cwiseAbs().maxCoeff(), 1.0);
}

TEST(TimeSeries, BinsAndHours) {
  Trajectory t{0, {{0, 3600}, {1, 90000}}};
  TimeSeriesInput s = time_series(t, TimeBinning::kHourOfDay);
  EXPECT_EQ(s.bins, (std::vector<int>{1, 1}));
  EXPECT_EQ(s.hours, (std::vector<double>{1.0, 25.0}));
}

}  // namespace
}  // namespace mvmn
