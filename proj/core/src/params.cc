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

#include "mvmn/params.h"

#include <stdexcept>

namespace mvmn {

ParamStore::ParamStore(const ParamStore& other) {
  for (const auto& p : other.params_) params_.push_back(std::make_unique<ad::Parameter>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    params_ = std::move(copy.params_);
  }
  return *this;
}

ad::Parameter& ParamStore::add(std::string name, ad::Index rows, ad::Index cols) {
  if (find(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  auto p = std::make_unique<ad::Parameter>();
  p->name = std::move(name);
  p->value = ad::Matrix::Zero(rows, cols);
  p->grad = ad::Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return *params_.back();
}

ad::Parameter* ParamStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const ad::Parameter* ParamStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

ad::Parameter& ParamStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter '" + std::string(name) + "'");
}

const ad::Parameter& ParamStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter '" + std::string(name) + "'");
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<std::string> ParamStore::groups() const {
  std::vector<std::string> out;
  for (const auto& p : params_) {
    std::string g(parameter_group(p->name));
    if (out.empty() || out.back() != g) {
      bool seen = false;
      for (const auto& x : out) seen = seen || x == g;
      if (!seen) out.push_back(std::move(g));
    }
  }
  return out;
}

std::string_view parameter_group(std::string_view name) {
  return name.substr(0, name.find('.'));
}

void init_uniform(ad::Parameter& p, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (ad::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
}

}  // namespace mvmn
