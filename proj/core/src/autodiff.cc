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

#include "mvmn/autodiff.h"

#include <cmath>
#include <limits>
#include <sstream>

namespace mvmn::ad {
namespace {

using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape(const Var& v) {
  std::ostringstream os;
  os << v.rows() << "x" << v.cols();
  return os.str();
}

[[noreturn]] void shape_error(const char* op, const Var& a, const Var& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape(a) + " and " + shape(b));
}

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

void same_shape(const char* op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

template <typename F, typename D>
Var unary(Var a, F forward, D derivative) {
  Matrix out = a.value().unaryExpr(forward);
  return a.tape()->record(std::move(out), {a},
                          [a, derivative](Tape& t, const Matrix& g, const Matrix& y) {
                            t.grad_buffer(a).array() +=
                                g.array() * derivative(a.value().array(), y.array());
                          });
}

void check_offsets(const char* op, std::span<const Index> offsets, Index rows) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows) {
    shape_error(op, "offsets must start at 0 and end at " + std::to_string(rows));
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] < offsets[i - 1]) shape_error(op, "offsets must be non-decreasing");
  }
}

}  // namespace

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("scalar(): value is not 1x1");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& parameter) {
  if (parameter.grad.rows() != parameter.value.rows() ||
      parameter.grad.cols() != parameter.value.cols()) {
    parameter.grad = Matrix::Zero(parameter.value.rows(), parameter.value.cols());
  }
  Node n;
  n.param = &parameter;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::check_owned(Var v) const {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw std::logic_error("Var does not belong to this tape");
  }
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Pullback pullback) {
  bool needs_grad = false;
  for (const Var& v : inputs) {
    check_owned(v);
    needs_grad = needs_grad || nodes_[v.id_].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs_grad;
  if (needs_grad) n.pullback = std::move(pullback);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Matrix& Tape::grad_buffer(Var v) {
  check_owned(v);
  Node& n = nodes_[v.id_];
  if (n.param) return n.param->grad;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  check_owned(loss);
  if (swept_) throw std::logic_error("backward() already ran on this tape; record a new forward");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + shape(loss));
  }
  swept_ = true;
  if (!nodes_[loss.id_].requires_grad) return;
  grad_buffer(loss)(0, 0) += 1.0;
  for (int id = loss.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.pullback || n.grad.size() == 0) continue;
    n.pullback(*this, n.grad, n.value);
  }
}

Matrix Tape::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id_];
  if (n.param) return n.param->grad;
  if (n.grad.size() == 0) return Matrix::Zero(value(v.id_).rows(), value(v.id_).cols());
  return n.grad;
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.grad_buffer(a).noalias() += g * b.value().transpose();
    if (b.requires_grad()) t.grad_buffer(b).noalias() += a.value().transpose() * g;
  });
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.grad_buffer(a) += g.transpose();
  });
}

Var add(Var a, Var b) {
  same_shape("add", a, b);
  Matrix out = a.value() + b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.grad_buffer(a) += g;
    if (b.requires_grad()) t.grad_buffer(b) += g;
  });
}

Var sub(Var a, Var b) {
  same_shape("sub", a, b);
  Matrix out = a.value() - b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.grad_buffer(a) += g;
    if (b.requires_grad()) t.grad_buffer(b) -= g;
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a, row);
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), {a, row},
                          [a, row](Tape& t, const Matrix& g, const Matrix&) {
                            if (a.requires_grad()) t.grad_buffer(a) += g;
                            if (row.requires_grad()) t.grad_buffer(row) += g.colwise().sum();
                          });
}

Var add_scalar(Var a, Var scalar) {
  if (scalar.rows() != 1 || scalar.cols() != 1) shape_error("add_scalar", a, scalar);
  Matrix out = a.value().array() + scalar.value()(0, 0);
  return a.tape()->record(std::move(out), {a, scalar},
                          [a, scalar](Tape& t, const Matrix& g, const Matrix&) {
                            if (a.requires_grad()) t.grad_buffer(a) += g;
                            if (scalar.requires_grad()) t.grad_buffer(scalar)(0, 0) += g.sum();
                          });
}

Var mul_scalar(Var a, Var scalar) {
  if (scalar.rows() != 1 || scalar.cols() != 1) shape_error("mul_scalar", a, scalar);
  Matrix out = a.value() * scalar.value()(0, 0);
  return a.tape()->record(std::move(out), {a, scalar},
                          [a, scalar](Tape& t, const Matrix& g, const Matrix&) {
                            if (a.requires_grad()) t.grad_buffer(a) += g * scalar.value()(0, 0);
                            if (scalar.requires_grad()) {
                              t.grad_buffer(scalar)(0, 0) += g.cwiseProduct(a.value()).sum();
                            }
                          });
}

Var scale(Var a, double factor) {
  Matrix out = a.value() * factor;
  return a.tape()->record(std::move(out), {a}, [a, factor](Tape& t, const Matrix& g, const Matrix&) {
    t.grad_buffer(a) += g * factor;
  });
}

Var hadamard(Var a, Var b) {
  same_shape("hadamard", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.grad_buffer(a) += g.cwiseProduct(b.value());
    if (b.requires_grad()) t.grad_buffer(b) += g.cwiseProduct(a.value());
  });
}

Var scale_rows(Var a, Var weights) {
  if (weights.cols() != 1 || weights.rows() != a.rows()) shape_error("scale_rows", a, weights);
  Matrix out = a.value().array().colwise() * weights.value().col(0).array();
  return a.tape()->record(
      std::move(out), {a, weights}, [a, weights](Tape& t, const Matrix& g, const Matrix&) {
        if (a.requires_grad()) {
          t.grad_buffer(a).array() += g.array().colwise() * weights.value().col(0).array();
        }
        if (weights.requires_grad()) {
          t.grad_buffer(weights).col(0) += g.cwiseProduct(a.value()).rowwise().sum();
        }
      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts[0], p);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->record(std::move(out), parts,
                                 [inputs](Tape& t, const Matrix& g, const Matrix&) {
                                   Index at = 0;
                                   for (const Var& p : inputs) {
                                     if (p.requires_grad()) t.grad_buffer(p) += g.middleCols(at, p.cols());
                                     at += p.cols();
                                   }
                                 });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", parts[0], p);
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->record(std::move(out), parts,
                                 [inputs](Tape& t, const Matrix& g, const Matrix&) {
                                   Index at = 0;
                                   for (const Var& p : inputs) {
                                     if (p.requires_grad()) t.grad_buffer(p) += g.middleRows(at, p.rows());
                                     at += p.rows();
                                   }
                                 });
}

Var slice_rows(Var a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    shape_error("slice_rows", "rows [" + std::to_string(begin) + ", " +
                                  std::to_string(begin + count) + ") of " + shape(a));
  }
  Matrix out = a.value().middleRows(begin, count);
  return a.tape()->record(std::move(out), {a},
                          [a, begin, count](Tape& t, const Matrix& g, const Matrix&) {
                            t.grad_buffer(a).middleRows(begin, count) += g;
                          });
}

Var slice_cols(Var a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    shape_error("slice_cols", "cols [" + std::to_string(begin) + ", " +
                                  std::to_string(begin + count) + ") of " + shape(a));
  }
  Matrix out = a.value().middleCols(begin, count);
  return a.tape()->record(std::move(out), {a},
                          [a, begin, count](Tape& t, const Matrix& g, const Matrix&) {
                            t.grad_buffer(a).middleCols(begin, count) += g;
                          });
}

Var pad_rows(Var a, Index rows) {
  if (rows < a.rows()) shape_error("pad_rows", "target smaller than " + shape(a));
  Matrix out = Matrix::Zero(rows, a.cols());
  out.topRows(a.rows()) = a.value();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.grad_buffer(a) += g.topRows(a.rows());
  });
}

Var pad_cols(Var a, Index cols) {
  if (cols < a.cols()) shape_error("pad_cols", "target smaller than " + shape(a));
  Matrix out = Matrix::Zero(a.rows(), cols);
  out.leftCols(a.cols()) = a.value();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.grad_buffer(a) += g.leftCols(a.cols());
  });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.grad_buffer(a).array() += g(0, 0);
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw ShapeError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](const auto&, const auto& y) { return 1.0 - y.square(); });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](const auto&, const auto& y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](const auto&, const auto& y) { return y; });
}

Var log(Var a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](const auto& x, const auto&) { return x.inverse(); });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](const auto& x, const auto&) {
        return x.unaryExpr([slope](double v) { return v > 0 ? 1.0 : slope; });
      });
}

Var elu(Var a, double alpha) {
  return unary(
      a, [alpha](double x) { return x > 0 ? x : alpha * std::expm1(x); },
      [alpha](const auto& x, const auto& y) { return (x > 0).select(1.0, y + alpha); });
}

Var softmax_rows(Var a, const BoolMask* mask) {
  if (mask && (mask->rows() != a.rows() || mask->cols() != a.cols())) {
    shape_error("softmax_rows", "mask shape differs from " + shape(a));
  }
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Index c = 0; c < x.cols(); ++c) {
      if (!mask || (*mask)(r, c)) mx = std::max(mx, x(r, c));
    }
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double z = 0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (!mask || (*mask)(r, c)) {
        out(r, c) = std::exp(x(r, c) - mx);
        z += out(r, c);
      }
    }
    out.row(r) /= z;
  }
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix& y) {
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    t.grad_buffer(a).array() += y.array() * (g.array().colwise() - dots.array());
  });
}

Var segment_softmax(Var scores, std::span<const Index> offsets) {
  if (scores.cols() != 1) shape_error("segment_softmax", "scores must be a column, got " + shape(scores));
  check_offsets("segment_softmax", offsets, scores.rows());
  const Matrix& x = scores.value();
  Matrix out(x.rows(), 1);
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const Index b = offsets[s], e = offsets[s + 1];
    if (b == e) continue;
    const double mx = x.col(0).segment(b, e - b).maxCoeff();
    double z = 0;
    for (Index i = b; i < e; ++i) {
      out(i, 0) = std::exp(x(i, 0) - mx);
      z += out(i, 0);
    }
    out.col(0).segment(b, e - b) /= z;
  }
  std::vector<Index> offs(offsets.begin(), offsets.end());
  return scores.tape()->record(std::move(out), {scores},
                               [scores, offs](Tape& t, const Matrix& g, const Matrix& y) {
                                 Matrix& gx = t.grad_buffer(scores);
                                 for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
                                   const Index b = offs[s], n = offs[s + 1] - offs[s];
                                   const double dot =
                                       g.col(0).segment(b, n).dot(y.col(0).segment(b, n));
                                   gx.col(0).segment(b, n).array() +=
                                       y.col(0).segment(b, n).array() *
                                       (g.col(0).segment(b, n).array() - dot);
                                 }
                               });
}

Var segment_sum(Var a, std::span<const Index> offsets) {
  check_offsets("segment_sum", offsets, a.rows());
  const auto segments = static_cast<Index>(offsets.size() - 1);
  Matrix out = Matrix::Zero(segments, a.cols());
  for (Index s = 0; s < segments; ++s) {
    for (Index i = offsets[s]; i < offsets[s + 1]; ++i) out.row(s) += a.value().row(i);
  }
  std::vector<Index> offs(offsets.begin(), offsets.end());
  return a.tape()->record(std::move(out), {a}, [a, offs](Tape& t, const Matrix& g, const Matrix&) {
    Matrix& ga = t.grad_buffer(a);
    for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
      for (Index i = offs[s]; i < offs[s + 1]; ++i) ga.row(i) += g.row(static_cast<Index>(s));
    }
  });
}

Var gather_rows(Var table, std::span<const int> ids) {
  Matrix out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      shape_error("gather_rows", "row " + std::to_string(ids[i]) + " outside " + shape(table));
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape()->record(std::move(out), {table},
                              [table, idx](Tape& t, const Matrix& g, const Matrix&) {
                                Matrix& gt = t.grad_buffer(table);
                                for (std::size_t i = 0; i < idx.size(); ++i) {
                                  gt.row(idx[i]) += g.row(static_cast<Index>(i));
                                }
                              });
}

Var dropout(Var a, double p, bool train, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  if (!train || p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(a.rows(), a.cols());
  const double scale_kept = 1.0 / (1.0 - p);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale_kept : 0.0;
  Matrix out = a.value().cwiseProduct(mask);
  return a.tape()->record(std::move(out), {a},
                          [a, mask = std::move(mask)](Tape& t, const Matrix& g, const Matrix&) {
                            t.grad_buffer(a) += g.cwiseProduct(mask);
                          });
}

Var max_over_axis(Var a, int axis, const BoolMask* mask) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("max_over_axis: axis must be 0 or 1");
  if (mask && (mask->rows() != a.rows() || mask->cols() != a.cols())) {
    shape_error("max_over_axis", "mask shape differs from " + shape(a));
  }
  const Matrix& x = a.value();
  const Index outer = axis == 1 ? x.rows() : x.cols();
  const Index inner = axis == 1 ? x.cols() : x.rows();
  Matrix out = axis == 1 ? Matrix::Zero(outer, 1) : Matrix::Zero(1, outer);
  std::vector<Index> arg(static_cast<std::size_t>(outer), -1);
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      const Index r = axis == 1 ? o : i;
      const Index c = axis == 1 ? i : o;
      if (mask && !(*mask)(r, c)) continue;
      const Index best = arg[static_cast<std::size_t>(o)];
      if (best < 0 || x(r, c) > (axis == 1 ? x(o, best) : x(best, o))) {
        arg[static_cast<std::size_t>(o)] = i;
      }
    }
    const Index best = arg[static_cast<std::size_t>(o)];
    if (best >= 0) out.data()[o] = axis == 1 ? x(o, best) : x(best, o);
  }
  return a.tape()->record(std::move(out), {a},
                          [a, axis, arg = std::move(arg)](Tape& t, const Matrix& g, const Matrix&) {
                            Matrix& ga = t.grad_buffer(a);
                            for (std::size_t o = 0; o < arg.size(); ++o) {
                              if (arg[o] < 0) continue;
                              const auto oi = static_cast<Index>(o);
                              if (axis == 1) {
                                ga(oi, arg[o]) += g(oi, 0);
                              } else {
                                ga(arg[o], oi) += g(0, oi);
                              }
                            }
                          });
}

Var row_normalize(Var a) {
  const Matrix& x = a.value();
  Eigen::VectorXd norms = x.rowwise().norm();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    if (norms(r) > 0) out.row(r) = x.row(r) / norms(r);
  }
  return a.tape()->record(std::move(out), {a},
                          [a, norms = std::move(norms)](Tape& t, const Matrix& g, const Matrix& y) {
                            Matrix& ga = t.grad_buffer(a);
                            for (Index r = 0; r < y.rows(); ++r) {
                              if (norms(r) <= 0) continue;
                              const double proj = g.row(r).dot(y.row(r));
                              ga.row(r) += (g.row(r) - proj * y.row(r)) / norms(r);
                            }
                          });
}

}  // namespace mvmn::ad
