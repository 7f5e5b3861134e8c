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

#ifndef MVMN_GRADCHECK_H_
#define MVMN_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmn/autodiff.h"
#include "mvmn/model.h"
#include "mvmn/params.h"
#include "mvmn/types.h"

namespace mvmn {

// Six users, eight locations, short trajectories, seven train edges, one
// validation and one test edge. Trajectory contents depend on `seed`.
Dataset toy_dataset(std::uint64_t seed);

struct ParamCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int checked = 0;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Central differences with step h on up to `samples` coordinates per
// parameter (all coordinates when samples <= 0). `loss` must record a 1x1
// loss on the given tape using params bound with Tape::param.
std::vector<ParamCheck> check_gradients(ParamStore& params,
                                        const std::function<ad::Var(ad::Tape&)>& loss,
                                        double h, int samples, std::uint64_t seed);

struct GroupCheck {
  std::string group;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int checked = 0;
};

struct GradcheckReport {
  std::vector<GroupCheck> groups;  // worst over all seeds
  double max_rel_error = 0.0;
  int seeds = 0;
  double h = 0.0;
};

struct GradcheckOptions {
  int seeds = 5;
  std::uint64_t base_seed = 1;
  double h = 1e-5;
  int samples = 12;
  ModelConfig config;  // dropout is ignored (evaluation mode)
};

// total_loss of the model on every pair of the toy dataset, one run per seed.
GradcheckReport run_gradcheck(const GradcheckOptions& options);
nlohmann::json to_json(const GradcheckReport& report);

}  // namespace mvmn

#endif  // MVMN_GRADCHECK_H_
