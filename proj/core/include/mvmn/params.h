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

#ifndef MVMN_PARAMS_H_
#define MVMN_PARAMS_H_

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mvmn/autodiff.h"

namespace mvmn {

// All trainable tensors, in registration order. Parameter addresses are
// stable for the lifetime of the store. Names use '.' separated paths; the
// first component is the parameter group ("embed", "lstm", "pp", "gat",
// "fusion").
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  // Zero-valued parameter with a zeroed gradient. Throws on duplicate names.
  ad::Parameter& add(std::string name, ad::Index rows, ad::Index cols);

  ad::Parameter& get(std::string_view name);
  const ad::Parameter& get(std::string_view name) const;
  ad::Parameter* find(std::string_view name);
  const ad::Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  ad::Parameter& at(std::size_t i) { return *params_[i]; }
  const ad::Parameter& at(std::size_t i) const { return *params_[i]; }

  void zero_grad();
  std::size_t num_scalars() const;

  // Distinct group names in registration order.
  std::vector<std::string> groups() const;

 private:
  std::vector<std::unique_ptr<ad::Parameter>> params_;
};

std::string_view parameter_group(std::string_view name);

// Fills `p` uniformly in [-bound, bound].
void init_uniform(ad::Parameter& p, double bound, std::mt19937_64& rng);

}  // namespace mvmn

#endif  // MVMN_PARAMS_H_
