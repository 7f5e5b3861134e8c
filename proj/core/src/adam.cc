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

#include "mvmn/adam.h"

#include <cmath>
#include <stdexcept>

namespace mvmn {

void Adam::step(ParamStore& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.at(i).grad.allFinite()) {
      throw std::runtime_error("non-finite gradient in parameter '" + params.at(i).name + "'");
    }
  }
  if (m_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(ad::Matrix::Zero(params.at(i).value.rows(), params.at(i).value.cols()));
      v_.push_back(m_.back());
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam used with a different ParamStore");
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Parameter& p = params.at(i);
    m_[i] = b1 * m_[i] + (1.0 - b1) * p.grad;
    v_[i] = b2 * v_[i] + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -= options_.lr * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + options_.eps);
    p.grad.setZero();
  }
}

}  // namespace mvmn
