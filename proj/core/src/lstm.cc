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

#include "mvmn/lstm.h"

#include <memory>
#include <string>

namespace mvmn::ad {

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& weights) {
  const Index hidden = weights.w_h.rows();
  if (weights.w_h.cols() != 4 * hidden || weights.w_x.cols() != 4 * hidden ||
      weights.bias.rows() != 1 || weights.bias.cols() != 4 * hidden) {
    throw ShapeError("lstm_cell: weight shapes inconsistent with hidden size " +
                     std::to_string(hidden));
  }
  if (x.cols() != weights.w_x.rows() || h_prev.cols() != hidden || c_prev.cols() != hidden ||
      h_prev.rows() != x.rows() || c_prev.rows() != x.rows()) {
    throw ShapeError("lstm_cell: state/input shapes inconsistent with weights");
  }
  Var gates = add_row(add(matmul(x, weights.w_x), matmul(h_prev, weights.w_h)), weights.bias);
  Var i = sigmoid(slice_cols(gates, 0, hidden));
  Var f = sigmoid(slice_cols(gates, hidden, hidden));
  Var g = tanh(slice_cols(gates, 2 * hidden, hidden));
  Var o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  Var c = add(hadamard(f, c_prev), hadamard(i, g));
  Var h = hadamard(o, tanh(c));
  return {h, c};
}

LstmState lstm_step(Var gates_x, Var h_prev, Var c_prev, Var w_h) {
  const Index hidden = w_h.rows();
  const Index n = gates_x.rows();
  if (w_h.cols() != 4 * hidden || gates_x.cols() != 4 * hidden) {
    throw ShapeError("lstm_step: gate width must be 4 x hidden size " + std::to_string(hidden));
  }
  const bool has_h = h_prev.valid();
  const bool has_c = c_prev.valid();
  if ((has_h && (h_prev.rows() != n || h_prev.cols() != hidden)) ||
      (has_c && (c_prev.rows() != n || c_prev.cols() != hidden))) {
    throw ShapeError("lstm_step: state shapes inconsistent with gates");
  }
  struct Saved {
    Eigen::ArrayXXd i, f, g, o, tc, c_prev;
  };
  auto saved = std::make_shared<Saved>();
  Matrix gates = gates_x.value();
  if (has_h) gates.noalias() += h_prev.value() * w_h.value();
  auto sig = [](const auto& z) { return (1.0 + (-z).exp()).inverse(); };
  saved->i = sig(gates.leftCols(hidden).array());
  saved->f = sig(gates.middleCols(hidden, hidden).array());
  saved->g = gates.middleCols(2 * hidden, hidden).array().tanh();
  saved->o = sig(gates.rightCols(hidden).array());
  saved->c_prev = has_c ? Eigen::ArrayXXd(c_prev.value().array())
                        : Eigen::ArrayXXd::Zero(n, hidden);
  const Eigen::ArrayXXd c = saved->f * saved->c_prev + saved->i * saved->g;
  saved->tc = c.tanh();
  Matrix out(n, 2 * hidden);
  out.leftCols(hidden) = (saved->o * saved->tc).matrix();
  out.rightCols(hidden) = c.matrix();

  std::vector<Var> inputs = {gates_x, w_h};
  if (has_h) inputs.push_back(h_prev);
  if (has_c) inputs.push_back(c_prev);
  Tape& tape = *gates_x.tape();
  Var both = tape.record(
      std::move(out), inputs,
      [gates_x, h_prev, c_prev, w_h, saved, hidden](Tape& t, const Matrix& grad, const Matrix&) {
        const Saved& s = *saved;
        const Eigen::ArrayXXd dh = grad.leftCols(hidden).array();
        const Eigen::ArrayXXd dc = grad.rightCols(hidden).array() + dh * s.o * (1.0 - s.tc.square());
        Matrix dgates(grad.rows(), 4 * hidden);
        dgates.leftCols(hidden) = (dc * s.g * s.i * (1.0 - s.i)).matrix();
        dgates.middleCols(hidden, hidden) = (dc * s.c_prev * s.f * (1.0 - s.f)).matrix();
        dgates.middleCols(2 * hidden, hidden) = (dc * s.i * (1.0 - s.g.square())).matrix();
        dgates.rightCols(hidden) = (dh * s.tc * s.o * (1.0 - s.o)).matrix();
        if (gates_x.requires_grad()) t.grad_buffer(gates_x) += dgates;
        if (h_prev.valid()) {
          if (w_h.requires_grad()) t.grad_buffer(w_h).noalias() += h_prev.value().transpose() * dgates;
          if (h_prev.requires_grad()) {
            t.grad_buffer(h_prev).noalias() += dgates * w_h.value().transpose();
          }
        }
        if (c_prev.valid() && c_prev.requires_grad()) {
          t.grad_buffer(c_prev) += (dc * s.f).matrix();
        }
      });
  return {slice_cols(both, 0, hidden), slice_cols(both, hidden, hidden)};
}

}  // namespace mvmn::ad
