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

#ifndef MVMN_AUTODIFF_H_
#define MVMN_AUTODIFF_H_

// Minimal dense reverse-mode differentiation over row-major double matrices.
//
// A Tape records every primitive applied to its Vars together with a pullback
// closure. Tape::backward seeds d(loss)/d(loss) = 1 and visits nodes in
// reverse creation order, which is a reverse topological order because a node
// can only consume earlier nodes. Gradients are always accumulated (+=).
//
// A Tape and its Vars are confined to one thread. Parameters bound with
// Tape::param() accumulate directly into Parameter::grad.

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvmn::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the Tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;
  // Convenience for 1x1 results.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Receives the node's accumulated gradient and its forward value.
  using Pullback = std::function<void(Tape&, const Matrix& grad, const Matrix& value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  Var param(Parameter& parameter);

  Var record(Matrix value, std::span<const Var> inputs, Pullback pullback);
  Var record(Matrix value, std::initializer_list<Var> inputs, Pullback pullback) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(pullback));
  }

  // Gradient buffer of `v`, zero-initialized on first use. Only valid for Vars
  // that require gradients.
  Matrix& grad_buffer(Var v);

  // Seeds the 1x1 `loss` with 1 and runs the reverse sweep. A tape can be
  // swept once; a second call throws std::logic_error.
  void backward(Var loss);

  // Gradient of a variable leaf (or any node) after backward; zeros if the
  // node received none.
  Matrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  const Matrix& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    Pullback pullback;
  };

  void check_owned(Var v) const;

  std::deque<Node> nodes_;
  bool swept_ = false;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

// Linear algebra and structure.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var add_row(Var a, Var row);        // broadcast 1 x m over rows
Var add_scalar(Var a, Var scalar);  // broadcast 1 x 1
Var mul_scalar(Var a, Var scalar);  // broadcast 1 x 1
Var scale(Var a, double factor);
Var hadamard(Var a, Var b);
Var scale_rows(Var a, Var weights);  // weights n x 1
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, Index begin, Index count);
Var slice_cols(Var a, Index begin, Index count);
Var pad_rows(Var a, Index rows);  // zero rows appended
Var pad_cols(Var a, Index cols);  // zero columns appended
Var sum(Var a);                   // 1 x 1
Var mean(Var a);                  // 1 x 1

// Elementwise nonlinearities.
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var leaky_relu(Var a, double slope);
Var elu(Var a, double alpha = 1.0);

// Row-wise softmax. Positions where `mask` is false get probability 0 and no
// gradient; a fully masked row is all zeros.
Var softmax_rows(Var a, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>* mask = nullptr);

// Softmax of an E x 1 column within consecutive segments
// [offsets[s], offsets[s+1]).
Var segment_softmax(Var scores, std::span<const Index> offsets);
// Sums rows within the same segments: E x m -> S x m.
Var segment_sum(Var a, std::span<const Index> offsets);

// Rows of `table` selected by `ids` (embedding lookup); gradients scatter-add.
Var gather_rows(Var table, std::span<const int> ids);

// Inverted dropout; identity when !train or p == 0.
Var dropout(Var a, double p, bool train, std::mt19937_64& rng);

// Max along `axis` (1: per row -> n x 1, 0: per column -> 1 x m). Ties go to
// the lowest index; masked-out entries never win; an all-masked slice yields 0.
Var max_over_axis(Var a, int axis,
                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>* mask = nullptr);

// Each row scaled to unit L2 norm; zero rows stay zero with zero gradient.
Var row_normalize(Var a);

}  // namespace mvmn::ad

#endif  // MVMN_AUTODIFF_H_
