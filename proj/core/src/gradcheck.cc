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

#include "mvmn/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "mvmn/seeding.h"

namespace mvmn {

Dataset toy_dataset(std::uint64_t seed) {
  Dataset ds;
  for (int u = 0; u < 6; ++u) ds.users.push_back("t" + std::to_string(u));
  for (int l = 0; l < 8; ++l) ds.locations.push_back("l" + std::to_string(l));
  std::mt19937_64 rng(derive_seed(seed, "toy"));
  std::uniform_int_distribution<int> length(2, 6);
  std::uniform_int_distribution<int> location(0, 7);
  std::uniform_real_distribution<double> gap_hours(0.1, 3.0);
  for (int u = 0; u < 6; ++u) {
    Trajectory t;
    t.user = u;
    double hours = 1000.0 + 24.0 * u;
    const int len = length(rng);
    for (int i = 0; i < len; ++i) {
      hours += gap_hours(rng);
      t.events.push_back({location(rng), static_cast<std::int64_t>(std::llround(hours * 3600.0))});
    }
    ds.trajectories.push_back(std::move(t));
  }
  ds.train_edges = {{0, 1}, {0, 2}, {1, 2}, {1, 4}, {2, 3}, {3, 4}, {4, 5}};
  ds.val_edges = {{0, 5}};
  ds.test_edges = {{3, 5}};
  ds.build_adjacency();
  ds.validate();
  return ds;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<ParamCheck> check_gradients(ParamStore& params,
                                        const std::function<ad::Var(ad::Tape&)>& loss, double h,
                                        int samples, std::uint64_t seed) {
  params.zero_grad();
  {
    ad::Tape tape;
    ad::Var l = loss(tape);
    tape.backward(l);
  }
  auto eval = [&]() {
    ad::Tape tape;
    return loss(tape).scalar();
  };
  std::mt19937_64 rng(derive_seed(seed, "gradcheck_coords"));
  std::vector<ParamCheck> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Parameter& p = params.at(i);
    const auto size = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), 0);
    if (samples > 0 && size > static_cast<std::size_t>(samples)) {
      std::vector<std::size_t> picked;
      std::sample(coords.begin(), coords.end(), std::back_inserter(picked),
                  static_cast<std::size_t>(samples), rng);
      coords = std::move(picked);
    }
    ParamCheck check;
    check.name = p.name;
    const ad::Matrix analytic = p.grad;
    for (std::size_t k : coords) {
      double& x = p.value.data()[k];
      const double saved = x;
      x = saved + h;
      const double up = eval();
      x = saved - h;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.data()[k];
      check.max_rel_error = std::max(check.max_rel_error, relative_error(a, numeric));
      check.max_abs_error = std::max(check.max_abs_error, std::abs(a - numeric));
      ++check.checked;
    }
    out.push_back(check);
  }
  params.zero_grad();
  return out;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  GradcheckReport report;
  report.seeds = options.seeds;
  report.h = options.h;
  std::map<std::string, GroupCheck> worst;
  std::vector<std::string> order;
  for (int s = 0; s < options.seeds; ++s) {
    const std::uint64_t seed = derive_seed(options.base_seed, "gradcheck_seed",
                                           static_cast<std::uint64_t>(s));
    const Dataset ds = toy_dataset(seed);
    ModelConfig config = options.config;
    config.seed = seed;
    Model model(ds, config);
    std::vector<LabeledPair> batch;
    for (UserId a = 0; a < 6; ++a) {
      for (UserId b = a + 1; b < 6; ++b) batch.push_back({a, b, ds.linked(a, b) ? 1 : 0});
    }
    auto loss = [&](ad::Tape& tape) { return model.total_loss(tape, batch, false, nullptr); };
    for (const ParamCheck& c :
         check_gradients(model.params(), loss, options.h, options.samples, seed)) {
      const std::string group(parameter_group(c.name));
      auto [it, fresh] = worst.try_emplace(group, GroupCheck{group});
      if (fresh) order.push_back(group);
      it->second.max_rel_error = std::max(it->second.max_rel_error, c.max_rel_error);
      it->second.max_abs_error = std::max(it->second.max_abs_error, c.max_abs_error);
      it->second.checked += c.checked;
    }
  }
  for (const std::string& g : order) {
    report.groups.push_back(worst[g]);
    report.max_rel_error = std::max(report.max_rel_error, worst[g].max_rel_error);
  }
  return report;
}

nlohmann::json to_json(const GradcheckReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const GroupCheck& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"max_rel_error", g.max_rel_error},
                      {"max_abs_error", g.max_abs_error},
                      {"checked", g.checked}});
  }
  return {{"seeds", r.seeds}, {"h", r.h}, {"max_rel_error", r.max_rel_error}, {"groups", groups}};
}

}  // namespace mvmn
