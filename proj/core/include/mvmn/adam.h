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

#ifndef MVMN_ADAM_H_
#define MVMN_ADAM_H_

#include <cstdint>
#include <vector>

#include "mvmn/params.h"

namespace mvmn {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are created lazily for the store
// passed to the first step() and must keep matching it afterwards.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // Applies one update from the accumulated gradients, then zeroes them.
  // Throws std::runtime_error naming the parameter if a gradient is not
  // finite; parameters are untouched in that case.
  void step(ParamStore& params);

  std::int64_t steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::int64_t steps_ = 0;
  std::vector<ad::Matrix> m_;
  std::vector<ad::Matrix> v_;
};

}  // namespace mvmn

#endif  // MVMN_ADAM_H_
