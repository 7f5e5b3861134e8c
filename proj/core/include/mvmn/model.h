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

#ifndef MVMN_MODEL_H_
#define MVMN_MODEL_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmn/autodiff.h"
#include "mvmn/lstm.h"
#include "mvmn/params.h"
#include "mvmn/relation_match.h"
#include "mvmn/temporal_match.h"
#include "mvmn/types.h"

namespace mvmn {

struct ViewToggles {
  bool location = true;
  bool temporal = true;
  bool pp_loss = true;  // only meaningful with the temporal view
  bool relation = true;

  friend bool operator==(const ViewToggles&, const ViewToggles&) = default;
};

// Named ablations: "full", "v1" (no relation), "v2" (no relation, no point
// process), "v3" (location only), "v4" (temporal only), "location",
// "temporal", "relation" (single views).
ViewToggles view_preset(std::string_view name);

struct ModelConfig {
  int embed_dim = 64;
  int hidden_dim = 128;
  int k_max = kDefaultKMax;
  int heads = 3;
  int gat_depth = 2;
  int gat_score_hidden = 0;  // 0: single linear scorer per head
  double leaky_slope = kGatLeakySlope;
  double beta = 0.1;
  int neg_per_pos = 4;
  double lr = 1e-4;
  int batch_size = 64;
  double dropout = 0.5;
  int fusion_hidden = 128;
  int epochs = 50;
  int patience = 10;
  std::uint64_t seed = 1;
  // During training, drop the batch's positive edges from the attention graph
  // so a pair cannot see its own link.
  bool mask_target_edges = true;
  ViewToggles views;

  // Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  // Point-process loss is active: temporal view on, pp_loss on, beta > 0.
  bool use_pp_loss() const;
  int fusion_input_dim() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// -(y log p + (1-y) log(1-p)) with p clamped to [1e-7, 1 - 1e-7].
double ce_loss(double y_hat, int y);
// Elementwise version for an n x 1 column of predictions.
ad::Var ce_loss(ad::Var y_hat, std::span<const double> labels);

// Parameter handles bound to one tape.
struct BoundParams {
  ad::Var user_embed, location_embed, time_embed;
  ad::LstmWeights lstm;
  PointProcessVars pp;
  std::vector<GatLayer> gat;
  ad::Var fusion_w1, fusion_b1, fusion_w2, fusion_b2;
};

class Model {
 public:
  // Fresh parameters initialized from config.seed.
  Model(const Dataset& dataset, ModelConfig config);
  // Parameters restored from a checkpoint; shapes must match.
  Model(const Dataset& dataset, ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Output {
    ad::Var y_hat;  // B x 1
    ad::Var pp;     // B x 1 point-process loss per pair (zeros when disabled)
  };

  // `trainable` binds parameters as gradient-receiving leaves; otherwise
  // their values are copied in as constants.
  BoundParams bind(ad::Tape& tape, bool trainable);
  BoundParams bind(ad::Tape& tape) const;

  Output forward(ad::Tape& tape, const BoundParams& bound,
                 std::span<const std::pair<UserId, UserId>> pairs, bool train,
                 std::mt19937_64* dropout_rng,
                 const GraphAdjacency* adjacency = nullptr) const;

  // Mean over the batch of ce + beta * pp. Records on `tape` with trainable
  // parameters; call tape.backward() on the result to fill gradients.
  ad::Var total_loss(ad::Tape& tape, std::span<const LabeledPair> batch, bool train,
                     std::mt19937_64* dropout_rng);

  // Evaluation mode (no dropout). Scores are in (0, 1).
  std::vector<double> score_pairs(std::span<const std::pair<UserId, UserId>> pairs) const;
  // (y_hat, point-process loss of the two trajectories).
  std::pair<double, double> score_pair(UserId m, UserId n) const;
  MatchViews views(UserId m, UserId n) const;

  const GraphAdjacency& adjacency() const { return adjacency_; }

 private:
  void create_parameters();
  void check_user(UserId u) const;

  const Dataset* dataset_;
  ModelConfig config_;
  ParamStore params_;
  GraphAdjacency adjacency_;
  std::vector<std::vector<int>> locations_;
  std::vector<TimeSeriesInput> series_;
};

}  // namespace mvmn

#endif  // MVMN_MODEL_H_
