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

#include "mvmn/model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvmn/location_match.h"
#include "mvmn/seeding.h"

namespace mvmn {

using ad::Index;
using ad::Matrix;
using ad::Var;
using nlohmann::json;

namespace {

constexpr double kProbClamp = 1e-7;
constexpr int kEmbedDimCap = 4096;

}  // namespace

ViewToggles view_preset(std::string_view name) {
  ViewToggles v;
  if (name == "full") return v;
  if (name == "v1") {
    v.relation = false;
  } else if (name == "v2") {
    v.relation = false;
    v.pp_loss = false;
  } else if (name == "v3" || name == "location") {
    v = {true, false, false, false};
  } else if (name == "v4" || name == "temporal") {
    v = {false, true, true, false};
  } else if (name == "relation") {
    v = {false, false, false, true};
  } else {
    throw std::invalid_argument("unknown view preset '" + std::string(name) + "'");
  }
  return v;
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("model config: " + what);
  };
  require(embed_dim > 0 && embed_dim <= kEmbedDimCap, "embed_dim must be in [1, 4096]");
  require(hidden_dim > 0 && hidden_dim <= kEmbedDimCap, "hidden_dim must be in [1, 4096]");
  require(k_max > 0, "k_max must be positive");
  require(heads >= 1, "heads must be >= 1");
  require(gat_depth >= 0, "gat_depth must be >= 0");
  require(gat_score_hidden >= 0, "gat_score_hidden must be >= 0");
  require(std::isfinite(beta) && beta >= 0, "beta must be >= 0");
  require(neg_per_pos >= 0, "neg_per_pos must be >= 0");
  require(std::isfinite(lr) && lr > 0, "lr must be positive");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
  require(fusion_hidden >= 1, "fusion_hidden must be >= 1");
  require(epochs >= 0, "epochs must be >= 0");
  require(patience >= 1, "patience must be >= 1");
  require(views.location || views.temporal || views.relation, "at least one view must be enabled");
}

bool ModelConfig::use_pp_loss() const { return views.temporal && views.pp_loss && beta > 0; }

int ModelConfig::fusion_input_dim() const {
  int dim = 0;
  if (views.location) dim += 2 * k_max;
  if (views.temporal) dim += hidden_dim;
  if (views.relation) dim += embed_dim;
  return dim;
}

json to_json(const ModelConfig& c) {
  return json{{"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"k_max", c.k_max},
              {"heads", c.heads},
              {"gat_depth", c.gat_depth},
              {"gat_score_hidden", c.gat_score_hidden},
              {"leaky_slope", c.leaky_slope},
              {"beta", c.beta},
              {"neg_per_pos", c.neg_per_pos},
              {"lr", c.lr},
              {"batch_size", c.batch_size},
              {"dropout", c.dropout},
              {"fusion_hidden", c.fusion_hidden},
              {"epochs", c.epochs},
              {"patience", c.patience},
              {"seed", c.seed},
              {"mask_target_edges", c.mask_target_edges},
              {"views",
               {{"location", c.views.location},
                {"temporal", c.views.temporal},
                {"pp_loss", c.views.pp_loss},
                {"relation", c.views.relation}}}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("embed_dim", c.embed_dim);
  get("hidden_dim", c.hidden_dim);
  get("k_max", c.k_max);
  get("heads", c.heads);
  get("gat_depth", c.gat_depth);
  get("gat_score_hidden", c.gat_score_hidden);
  get("leaky_slope", c.leaky_slope);
  get("beta", c.beta);
  get("neg_per_pos", c.neg_per_pos);
  get("lr", c.lr);
  get("batch_size", c.batch_size);
  get("dropout", c.dropout);
  get("fusion_hidden", c.fusion_hidden);
  get("epochs", c.epochs);
  get("patience", c.patience);
  get("seed", c.seed);
  get("mask_target_edges", c.mask_target_edges);
  if (j.contains("views")) {
    const json& v = j.at("views");
    c.views.location = v.value("location", true);
    c.views.temporal = v.value("temporal", true);
    c.views.pp_loss = v.value("pp_loss", true);
    c.views.relation = v.value("relation", true);
  }
  c.validate();
  return c;
}

double ce_loss(double y_hat, int y) {
  const double p = std::clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(p) : -std::log1p(-p);
}

Var ce_loss(Var y_hat, std::span<const double> labels) {
  if (y_hat.cols() != 1 || static_cast<std::size_t>(y_hat.rows()) != labels.size()) {
    throw ad::ShapeError("ce_loss: predictions must be n x 1 with n labels");
  }
  const Index n = y_hat.rows();
  Matrix y(n, 1);
  Matrix out(n, 1);
  for (Index i = 0; i < n; ++i) {
    y(i, 0) = labels[i];
    const double p = std::clamp(y_hat.value()(i, 0), kProbClamp, 1.0 - kProbClamp);
    out(i, 0) = -(y(i, 0) * std::log(p) + (1.0 - y(i, 0)) * std::log1p(-p));
  }
  return y_hat.tape()->record(
      std::move(out), {y_hat}, [y_hat, y](ad::Tape& t, const Matrix& g, const Matrix&) {
        Matrix& gy = t.grad_buffer(y_hat);
        for (Index i = 0; i < g.rows(); ++i) {
          const double p = y_hat.value()(i, 0);
          if (p < kProbClamp || p > 1.0 - kProbClamp) continue;  // clamped: flat
          gy(i, 0) += g(i, 0) * (-y(i, 0) / p + (1.0 - y(i, 0)) / (1.0 - p));
        }
      });
}

Model::Model(const Dataset& dataset, ModelConfig config)
    : dataset_(&dataset), config_(std::move(config)) {
  config_.validate();
  create_parameters();
  adjacency_ = make_adjacency(dataset.train_adjacency);
  for (const Trajectory& t : dataset.trajectories) {
    if (static_cast<int>(t.length()) > config_.k_max) {
      throw std::invalid_argument("trajectory of user " + dataset.users[t.user] +
                                  " is longer than k_max");
    }
    locations_.push_back(location_sequence(t));
    series_.push_back(time_series(t, dataset.time_binning));
  }
}

Model::Model(const Dataset& dataset, ModelConfig config, ParamStore params)
    : Model(dataset, std::move(config)) {
  if (params.size() != params_.size()) {
    throw std::invalid_argument("checkpoint has " + std::to_string(params.size()) +
                                " parameters, model expects " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ad::Parameter& want = params_.at(i);
    const ad::Parameter* got = params.find(want.name);
    if (got == nullptr) throw std::invalid_argument("checkpoint lacks parameter " + want.name);
    if (got->value.rows() != want.value.rows() || got->value.cols() != want.value.cols()) {
      throw std::invalid_argument("parameter " + want.name + " has the wrong shape");
    }
    params_.at(i).value = got->value;
  }
}

void Model::create_parameters() {
  const int d = config_.embed_dim;
  const int h = config_.hidden_dim;
  const std::uint64_t seed = config_.seed;
  auto make = [&](const std::string& name, Index rows, Index cols, double fan_in) {
    ad::Parameter& p = params_.add(name, rows, cols);
    std::mt19937_64 rng(derive_seed(seed, "init:" + name));
    init_uniform(p, 1.0 / std::sqrt(fan_in), rng);
    return &p;
  };
  const Dataset& ds = *dataset_;
  if (config_.views.relation) make("embed.user", ds.num_users(), d, d);
  if (config_.views.location) make("embed.location", ds.num_locations(), d, d);
  if (config_.views.temporal) {
    make("embed.time", ds.num_time_bins(), d, d);
    make("lstm.w_x", d, 4 * h, d);
    make("lstm.w_h", h, 4 * h, h);
    make("lstm.bias", 1, 4 * h, h);
  }
  if (config_.use_pp_loss()) {
    make("pp.v", h, 1, h);
    params_.add("pp.omega", 1, 1).value(0, 0) = 0.1;
    params_.add("pp.b", 1, 1);
  }
  if (config_.views.relation) {
    for (int k = 0; k < config_.gat_depth; ++k) {
      const std::string layer = "gat." + std::to_string(k);
      make(layer + ".w", d, d, d);
      for (int hd = 0; hd < config_.heads; ++hd) {
        const std::string head = layer + ".head" + std::to_string(hd);
        const int s = config_.gat_score_hidden;
        if (s == 0) {
          make(head + ".a_src", d, 1, 2.0 * d);
          make(head + ".a_dst", d, 1, 2.0 * d);
        } else {
          make(head + ".w_src", d, s, 2.0 * d);
          make(head + ".w_dst", d, s, 2.0 * d);
          make(head + ".b", 1, s, 2.0 * d);
          make(head + ".out", s, 1, s);
        }
      }
    }
  }
  const int in = config_.fusion_input_dim();
  const int hid = config_.fusion_hidden;
  make("fusion.w1", in, hid, in);
  make("fusion.b1", 1, hid, in);
  make("fusion.w2", hid, 1, hid);
  // Output bias starts at the log-odds of the training label prior.
  params_.add("fusion.b2", 1, 1).value(0, 0) =
      config_.neg_per_pos > 0 ? -std::log(static_cast<double>(config_.neg_per_pos)) : 0.0;
}

BoundParams Model::bind(ad::Tape& tape, bool trainable) {
  auto get = [&](const std::string& name) {
    ad::Parameter& p = params_.get(name);
    return trainable ? tape.param(p) : tape.constant(p.value);
  };
  BoundParams b;
  if (config_.views.relation) b.user_embed = get("embed.user");
  if (config_.views.location) b.location_embed = get("embed.location");
  if (config_.views.temporal) {
    b.time_embed = get("embed.time");
    b.lstm = {get("lstm.w_x"), get("lstm.w_h"), get("lstm.bias")};
  }
  if (config_.use_pp_loss()) b.pp = {get("pp.v"), get("pp.omega"), get("pp.b")};
  if (config_.views.relation) {
    for (int k = 0; k < config_.gat_depth; ++k) {
      const std::string layer = "gat." + std::to_string(k);
      GatLayer gl;
      gl.w = get(layer + ".w");
      for (int hd = 0; hd < config_.heads; ++hd) {
        const std::string head = layer + ".head" + std::to_string(hd);
        GatHead gh;
        if (config_.gat_score_hidden == 0) {
          gh.a_src = get(head + ".a_src");
          gh.a_dst = get(head + ".a_dst");
        } else {
          gh.score_w_src = get(head + ".w_src");
          gh.score_w_dst = get(head + ".w_dst");
          gh.score_b = get(head + ".b");
          gh.score_out = get(head + ".out");
        }
        gl.heads.push_back(gh);
      }
      b.gat.push_back(std::move(gl));
    }
  }
  b.fusion_w1 = get("fusion.w1");
  b.fusion_b1 = get("fusion.b1");
  b.fusion_w2 = get("fusion.w2");
  b.fusion_b2 = get("fusion.b2");
  return b;
}

BoundParams Model::bind(ad::Tape& tape) const {
  return const_cast<Model*>(this)->bind(tape, false);
}

void Model::check_user(UserId u) const {
  if (u < 0 || static_cast<std::size_t>(u) >= dataset_->num_users()) {
    throw std::invalid_argument("unknown user id " + std::to_string(u));
  }
}

namespace {

struct ViewVars {
  Var loc, time, rel;  // B x dim each, when enabled
  Var pp;              // B x 1
};

}  // namespace

static ViewVars compute_views(const Model& model, ad::Tape& tape, const BoundParams& bound,
                              std::span<const std::pair<UserId, UserId>> pairs,
                              const GraphAdjacency& adjacency,
                              const std::vector<std::vector<int>>& locations,
                              const std::vector<TimeSeriesInput>& series) {
  const ModelConfig& cfg = model.config();
  const Index batch = static_cast<Index>(pairs.size());
  ViewVars out;
  if (cfg.views.location) {
    std::vector<Var> rows;
    rows.reserve(pairs.size());
    for (const auto& [m, n] : pairs) {
      rows.push_back(v_loc(match_vectors(bound.location_embed, locations[m], locations[n]),
                           cfg.k_max));
    }
    out.loc = ad::concat_rows(rows);
  }
  if (cfg.views.temporal) {
    // Each distinct user is encoded once per batch.
    std::vector<int> users;
    for (const auto& [m, n] : pairs) {
      users.push_back(m);
      users.push_back(n);
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::vector<const TimeSeriesInput*> inputs;
    inputs.reserve(users.size());
    for (int u : users) inputs.push_back(&series[u]);
    const bool with_pp = cfg.use_pp_loss();
    BatchEncoding enc =
        encode_batch(inputs, bound.time_embed, bound.lstm, with_pp ? &bound.pp : nullptr);
    std::vector<int> idx_m, idx_n;
    for (const auto& [m, n] : pairs) {
      idx_m.push_back(static_cast<int>(std::lower_bound(users.begin(), users.end(), m) - users.begin()));
      idx_n.push_back(static_cast<int>(std::lower_bound(users.begin(), users.end(), n) - users.begin()));
    }
    out.time = v_time(ad::gather_rows(enc.final_states, idx_m),
                      ad::gather_rows(enc.final_states, idx_n));
    if (with_pp) {
      out.pp = ad::add(ad::gather_rows(enc.neg_log_likelihood, idx_m),
                       ad::gather_rows(enc.neg_log_likelihood, idx_n));
    }
  }
  if (cfg.views.relation) {
    Var final = propagate(bound.user_embed, adjacency, bound.gat, cfg.leaky_slope);
    std::vector<int> idx_m, idx_n;
    for (const auto& [m, n] : pairs) {
      idx_m.push_back(m);
      idx_n.push_back(n);
    }
    out.rel = v_rel(ad::gather_rows(final, idx_m), ad::gather_rows(final, idx_n));
  }
  if (!out.pp.valid()) out.pp = tape.constant(Matrix::Zero(batch, 1));
  return out;
}

Model::Output Model::forward(ad::Tape& tape, const BoundParams& bound,
                             std::span<const std::pair<UserId, UserId>> pairs, bool train,
                             std::mt19937_64* dropout_rng,
                             const GraphAdjacency* adjacency) const {
  if (pairs.empty()) throw std::invalid_argument("forward: empty batch");
  for (const auto& [m, n] : pairs) {
    check_user(m);
    check_user(n);
  }
  ViewVars v = compute_views(*this, tape, bound, pairs, adjacency ? *adjacency : adjacency_, locations_, series_);
  std::vector<Var> parts;
  if (v.loc.valid()) parts.push_back(v.loc);
  if (v.time.valid()) parts.push_back(v.time);
  if (v.rel.valid()) parts.push_back(v.rel);
  Var x = parts.size() == 1 ? parts[0] : ad::concat_cols(parts);
  Var hidden = ad::elu(ad::add_row(ad::matmul(x, bound.fusion_w1), bound.fusion_b1));
  if (train && config_.dropout > 0) {
    if (dropout_rng == nullptr) throw std::invalid_argument("forward: training needs an rng");
    hidden = ad::dropout(hidden, config_.dropout, true, *dropout_rng);
  }
  Var logit = ad::add_scalar(ad::matmul(hidden, bound.fusion_w2), bound.fusion_b2);
  return {ad::sigmoid(logit), v.pp};
}

Var Model::total_loss(ad::Tape& tape, std::span<const LabeledPair> batch, bool train,
                      std::mt19937_64* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
  std::vector<std::pair<UserId, UserId>> pairs;
  std::vector<double> labels;
  for (const LabeledPair& p : batch) {
    if (p.m == p.n) throw std::invalid_argument("total_loss: pair of a user with itself");
    pairs.emplace_back(p.m, p.n);
    labels.push_back(p.label);
  }
  BoundParams bound = bind(tape, true);
  GraphAdjacency masked;
  const GraphAdjacency* adjacency = nullptr;
  if (train && config_.views.relation && config_.mask_target_edges) {
    std::vector<std::vector<UserId>> lists = dataset_->train_adjacency;
    auto drop = [&lists](UserId u, UserId v) {
      auto& l = lists[u];
      auto it = std::lower_bound(l.begin() + 1, l.end(), v);
      if (it != l.end() && *it == v) l.erase(it);
    };
    for (const LabeledPair& p : batch) {
      if (p.label == 1) {
        drop(p.m, p.n);
        drop(p.n, p.m);
      }
    }
    masked = make_adjacency(lists);
    adjacency = &masked;
  }
  Output out = forward(tape, bound, pairs, train, dropout_rng, adjacency);
  Var per_pair = ce_loss(out.y_hat, labels);
  if (config_.use_pp_loss()) per_pair = ad::add(per_pair, ad::scale(out.pp, config_.beta));
  return ad::mean(per_pair);
}

std::vector<double> Model::score_pairs(std::span<const std::pair<UserId, UserId>> pairs) const {
  constexpr std::size_t kChunk = 2048;
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (std::size_t begin = 0; begin < pairs.size(); begin += kChunk) {
    const std::size_t count = std::min(kChunk, pairs.size() - begin);
    ad::Tape tape;
    BoundParams bound = bind(tape);
    Output out = forward(tape, bound, pairs.subspan(begin, count), false, nullptr);
    for (Index i = 0; i < out.y_hat.rows(); ++i) scores.push_back(out.y_hat.value()(i, 0));
  }
  return scores;
}

std::pair<double, double> Model::score_pair(UserId m, UserId n) const {
  ad::Tape tape;
  BoundParams bound = bind(tape);
  const std::pair<UserId, UserId> pair{m, n};
  Output out = forward(tape, bound, std::span(&pair, 1), false, nullptr);
  return {out.y_hat.value()(0, 0), out.pp.value()(0, 0)};
}

MatchViews Model::views(UserId m, UserId n) const {
  check_user(m);
  check_user(n);
  ad::Tape tape;
  BoundParams bound = bind(tape);
  const std::pair<UserId, UserId> pair{m, n};
  ViewVars v = compute_views(*this, tape, bound, std::span(&pair, 1), adjacency_, locations_, series_);
  MatchViews out;
  if (v.loc.valid()) out.v_loc = v.loc.value().row(0).transpose();
  if (v.time.valid()) out.v_time = v.time.value().row(0).transpose();
  if (v.rel.valid()) out.v_rel = v.rel.value().row(0).transpose();
  return out;
}

}  // namespace mvmn
