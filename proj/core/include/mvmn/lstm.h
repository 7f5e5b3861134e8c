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

#ifndef MVMN_LSTM_H_
#define MVMN_LSTM_H_

#include "mvmn/autodiff.h"

namespace mvmn::ad {

// Gate columns are laid out [input | forget | candidate | output], each of
// width H. Inputs are row-per-sequence: x is n x d, h and c are n x H.
struct LstmWeights {
  Var w_x;   // d x 4H
  Var w_h;   // H x 4H
  Var bias;  // 1 x 4H
};

struct LstmState {
  Var h;
  Var c;
};

//   i = sigmoid(.), f = sigmoid(.), g = tanh(.), o = sigmoid(.)
//   c = f * c_prev + i * g,   h = o * tanh(c)
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& weights);

// Same cell as one fused node. `gates_x` holds x w_x + bias (n x 4H), which
// lets callers project a whole embedding table once and gather rows from it.
// An invalid `h_prev` / `c_prev` means a zero state.
LstmState lstm_step(Var gates_x, Var h_prev, Var c_prev, Var w_h);

}  // namespace mvmn::ad

#endif  // MVMN_LSTM_H_
