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

#ifndef MVMN_TEMPORAL_MATCH_H_
#define MVMN_TEMPORAL_MATCH_H_

// Time-series view. Each user's time-bin embeddings run through a shared LSTM;
// the last hidden states of the two users are matched by tanh(h_m * h_n).
// Separately, every hidden state h_i parameterizes a conditional intensity
//
//   lambda(t) = exp(v.h_i + omega * (t - t_i) + b)
//
// for the next event, whose log-density at gap dt = t_{i+1} - t_i has the
// closed form
//
//   log f = v.h + b + omega*dt + (exp(v.h + b) - exp(v.h + b + omega*dt)) / omega
//
// and the point-process loss is the negated sum over consecutive gaps. All
// times are in hours.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mvmn/autodiff.h"
#include "mvmn/lstm.h"
#include "mvmn/types.h"

namespace mvmn {

// Exponent arguments are clamped to +-kExpClamp.
inline constexpr double kExpClamp = 50.0;
// Below this |omega| the log-density uses its omega -> 0 limit
// a - dt * exp(a).
inline constexpr double kOmegaLimit = 1e-6;

struct TimeSeriesInput {
  std::vector<int> bins;      // time-bin ids for the embedding lookup
  std::vector<double> hours;  // event times in hours, non-decreasing
};

TimeSeriesInput time_series(const Trajectory& trajectory, TimeBinning binning);

struct PointProcessVars {
  ad::Var v;      // H x 1
  ad::Var omega;  // 1 x 1
  ad::Var b;      // 1 x 1
};

struct PPParams {
  Eigen::VectorXd v;
  double omega = 0.1;
  double b = 0.0;
};

// Per-step hidden states h_1..h_l (each 1 x H) from h_0 = c_0 = 0.
std::vector<ad::Var> encode(const TimeSeriesInput& series, ad::Var time_embeddings,
                            const ad::LstmWeights& lstm);

struct BatchEncoding {
  ad::Var final_states;        // n x H; row i is the last hidden state of series i
  ad::Var neg_log_likelihood;  // n x 1; point-process loss of series i (if requested)
};

// Encodes many series at once. Series are processed longest first so that
// each step is one matrix product over the still-active rows; results come
// back in input order. Throws std::invalid_argument for an empty series or a
// negative gap.
BatchEncoding encode_batch(std::span<const TimeSeriesInput* const> series,
                           ad::Var time_embeddings, const ad::LstmWeights& lstm,
                           const PointProcessVars* pp);

// tanh(h_m * h_n), elementwise.
ad::Var v_time(ad::Var h_m, ad::Var h_n);

double intensity(double vh, double dt, double omega, double b);
double intensity(const Eigen::VectorXd& h, double dt, const PPParams& pp);

// Closed-form log-density; `vh` is v.h.
double log_density(double vh, double dt, double omega, double b);
double log_density(const Eigen::VectorXd& h, double dt, const PPParams& pp);

// Differentiable log-density for a column of events: `a` holds v.h + b
// (n x 1), `omega` is 1 x 1, `dt` has n entries.
ad::Var log_density(ad::Var a, ad::Var omega, std::span<const double> dt);

// Point-process loss of one user pair from per-step hidden states (each
// 1 x H) and event hours. Term i uses h_i and t_{i+1} - t_i; single-event
// sequences contribute nothing.
ad::Var pp_loss(std::span<const ad::Var> states_m, std::span<const double> hours_m,
                std::span<const ad::Var> states_n, std::span<const double> hours_n,
                const PointProcessVars& pp);

}  // namespace mvmn

#endif  // MVMN_TEMPORAL_MATCH_H_
