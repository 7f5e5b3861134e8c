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

#include "mvmn/temporal_match.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvmn {
namespace {

using ad::Index;
using ad::Matrix;
using ad::Var;

double clamp_exp_arg(double x) { return std::clamp(x, -kExpClamp, kExpClamp); }

// G(omega) = (exp(omega*dt) - 1) / omega and dG/domega. Below kOmegaLimit the
// limit dt is used with its first-order term, so the value and the omega
// gradient stay consistent; near omega*dt = 0 a series; past the exponent
// clamp G continues linearly in dt so the density keeps decaying.
struct GapIntegral {
  double g;
  double dg;
};

GapIntegral gap_integral(double omega, double dt) {
  if (std::abs(omega) < kOmegaLimit) return {dt * (1.0 + 0.5 * omega * dt), 0.5 * dt * dt};
  const double z = omega * dt;
  if (std::abs(z) < 1e-3) {
    const double g = dt * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
    const double dg = dt * dt * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0);
    return {g, dg};
  }
  if (z > kExpClamp) {
    const double e = std::exp(kExpClamp);
    const double g = (e * (1.0 + z - kExpClamp) - 1.0) / omega;
    return {g, (dt * e - g) / omega};
  }
  const double g = std::expm1(z) / omega;
  return {g, (dt * std::exp(z) - g) / omega};
}

void check_series(const TimeSeriesInput& s) {
  if (s.bins.empty()) throw std::invalid_argument("empty time series");
  if (s.bins.size() != s.hours.size()) {
    throw std::invalid_argument("time series bins/hours length mismatch");
  }
  for (std::size_t i = 1; i < s.hours.size(); ++i) {
    if (s.hours[i] < s.hours[i - 1]) throw std::invalid_argument("negative inter-event gap");
  }
}

}  // namespace

TimeSeriesInput time_series(const Trajectory& trajectory, TimeBinning binning) {
  TimeSeriesInput s;
  s.bins.reserve(trajectory.events.size());
  s.hours.reserve(trajectory.events.size());
  for (const CheckIn& c : trajectory.events) {
    s.bins.push_back(time_bin(c.timestamp, binning));
    s.hours.push_back(c.hours());
  }
  return s;
}

std::vector<Var> encode(const TimeSeriesInput& series, Var time_embeddings,
                        const ad::LstmWeights& lstm) {
  check_series(series);
  ad::Tape& tape = *time_embeddings.tape();
  const Index hidden = lstm.w_h.rows();
  Var h = tape.constant(Matrix::Zero(1, hidden));
  Var c = tape.constant(Matrix::Zero(1, hidden));
  std::vector<Var> states;
  for (int bin : series.bins) {
    const int id[] = {bin};
    ad::LstmState next = ad::lstm_cell(ad::gather_rows(time_embeddings, id), h, c, lstm);
    h = next.h;
    c = next.c;
    states.push_back(h);
  }
  return states;
}

BatchEncoding encode_batch(std::span<const TimeSeriesInput* const> series, Var time_embeddings,
                           const ad::LstmWeights& lstm, const PointProcessVars* pp) {
  if (series.empty()) throw std::invalid_argument("encode_batch: no series");
  for (const TimeSeriesInput* s : series) check_series(*s);
  ad::Tape& tape = *time_embeddings.tape();
  const std::size_t n = series.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return series[a]->bins.size() > series[b]->bins.size();
  });
  const std::size_t max_len = series[order[0]]->bins.size();
  // active[t] = number of series with length > t.
  std::vector<Index> active(max_len + 1, 0);
  for (std::size_t t = 0; t <= max_len; ++t) {
    for (std::size_t i : order) {
      if (series[i]->bins.size() > t) ++active[t];
    }
  }

  std::vector<Var> finished;  // slices in decreasing step order
  std::vector<Var> step_states;
  Var nll_sum;
  Var h, c;
  // x w_x + bias for every time bin, gathered per step.
  Var projected = ad::add_row(ad::matmul(time_embeddings, lstm.w_x), lstm.bias);
  for (std::size_t t = 0; t < max_len; ++t) {
    const Index rows = active[t];
    std::vector<int> bins(static_cast<std::size_t>(rows));
    for (Index r = 0; r < rows; ++r) bins[r] = series[order[r]]->bins[t];
    Var gates_x = ad::gather_rows(projected, bins);
    Var h_prev = t == 0 ? Var() : (h.rows() == rows ? h : ad::slice_rows(h, 0, rows));
    Var c_prev = t == 0 ? Var() : (c.rows() == rows ? c : ad::slice_rows(c, 0, rows));
    ad::LstmState next = ad::lstm_step(gates_x, h_prev, c_prev, lstm.w_h);
    h = next.h;
    c = next.c;
    step_states.push_back(h);

    const Index with_next = active[t + 1];
    if (pp && with_next > 0) {
      std::vector<double> dt(static_cast<std::size_t>(with_next));
      for (Index r = 0; r < with_next; ++r) {
        const auto& hours = series[order[r]]->hours;
        dt[r] = hours[t + 1] - hours[t];
      }
      Var a = ad::add_scalar(ad::matmul(ad::slice_rows(h, 0, with_next), pp->v), pp->b);
      Var term = ad::pad_rows(log_density(a, pp->omega, dt), static_cast<Index>(n));
      nll_sum = nll_sum.valid() ? ad::add(nll_sum, term) : term;
    }
  }
  for (std::size_t t = max_len; t-- > 0;) {
    const Index begin = active[t + 1];
    const Index count = active[t] - active[t + 1];
    if (count > 0) finished.push_back(ad::slice_rows(step_states[t], begin, count));
  }
  Var final_sorted = ad::concat_rows(finished);

  std::vector<int> position(n);
  for (std::size_t r = 0; r < n; ++r) position[order[r]] = static_cast<int>(r);
  BatchEncoding out;
  out.final_states = ad::gather_rows(final_sorted, position);
  if (pp) {
    Var nll = nll_sum.valid() ? ad::scale(nll_sum, -1.0)
                              : tape.constant(Matrix::Zero(static_cast<Index>(n), 1));
    out.neg_log_likelihood = ad::gather_rows(nll, position);
  }
  return out;
}

Var v_time(Var h_m, Var h_n) { return ad::tanh(ad::hadamard(h_m, h_n)); }

double intensity(double vh, double dt, double omega, double b) {
  return std::exp(clamp_exp_arg(vh + omega * dt + b));
}

double intensity(const Eigen::VectorXd& h, double dt, const PPParams& pp) {
  return intensity(pp.v.dot(h), dt, pp.omega, pp.b);
}

double log_density(double vh, double dt, double omega, double b) {
  if (dt < 0) throw std::invalid_argument("log_density: negative gap");
  const double a = vh + b;
  const GapIntegral gi = gap_integral(omega, dt);
  return a + omega * dt - std::exp(clamp_exp_arg(a)) * gi.g;
}

double log_density(const Eigen::VectorXd& h, double dt, const PPParams& pp) {
  return log_density(pp.v.dot(h), dt, pp.omega, pp.b);
}

Var log_density(Var a, Var omega, std::span<const double> dt) {
  if (a.cols() != 1 || a.rows() != static_cast<Index>(dt.size())) {
    throw ad::ShapeError("log_density: a must be n x 1 matching dt");
  }
  if (omega.rows() != 1 || omega.cols() != 1) throw ad::ShapeError("log_density: omega must be 1x1");
  const double w = omega.value()(0, 0);
  const Index n = a.rows();
  Matrix out(n, 1);
  Matrix d_a(n, 1);
  Matrix d_omega(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double gap = dt[static_cast<std::size_t>(i)];
    if (gap < 0) throw std::invalid_argument("log_density: negative gap");
    const double ai = a.value()(i, 0);
    const double ea = std::exp(clamp_exp_arg(ai));
    const bool clamped = ai > kExpClamp || ai < -kExpClamp;
    const GapIntegral gi = gap_integral(w, gap);
    out(i, 0) = ai + w * gap - ea * gi.g;
    d_a(i, 0) = 1.0 - (clamped ? 0.0 : ea * gi.g);
    d_omega(i, 0) = gap - ea * gi.dg;
  }
  return a.tape()->record(std::move(out), {a, omega},
                          [a, omega, d_a = std::move(d_a), d_omega = std::move(d_omega)](
                              ad::Tape& t, const Matrix& g, const Matrix&) {
                            if (a.requires_grad()) t.grad_buffer(a) += g.cwiseProduct(d_a);
                            if (omega.requires_grad()) {
                              t.grad_buffer(omega)(0, 0) += g.cwiseProduct(d_omega).sum();
                            }
                          });
}

Var pp_loss(std::span<const Var> states_m, std::span<const double> hours_m,
            std::span<const Var> states_n, std::span<const double> hours_n,
            const PointProcessVars& pp) {
  ad::Tape& tape = *pp.v.tape();
  Var total = tape.constant(Matrix::Zero(1, 1));
  auto one_user = [&](std::span<const Var> states, std::span<const double> hours) {
    if (states.size() != hours.size()) throw std::invalid_argument("pp_loss: length mismatch");
    if (states.size() < 2) return;
    std::vector<double> dt;
    for (std::size_t i = 0; i + 1 < hours.size(); ++i) {
      if (hours[i + 1] < hours[i]) throw std::invalid_argument("pp_loss: negative gap");
      dt.push_back(hours[i + 1] - hours[i]);
    }
    Var stacked = ad::concat_rows(states.first(states.size() - 1));
    Var a = ad::add_scalar(ad::matmul(stacked, pp.v), pp.b);
    total = ad::sub(total, ad::sum(log_density(a, pp.omega, dt)));
  };
  one_user(states_m, hours_m);
  one_user(states_n, hours_n);
  return total;
}

}  // namespace mvmn
