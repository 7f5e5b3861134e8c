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

#include "mvmn/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mvmn/adam.h"
#include "mvmn/dataset_io.h"
#include "mvmn/evaluation.h"
#include "mvmn/seeding.h"

namespace mvmn {

std::vector<std::vector<LabeledPair>> make_training_batches(const EdgeSet& train_edges,
                                                            const Dataset& dataset,
                                                            int neg_per_pos, std::uint64_t seed,
                                                            int epoch, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (neg_per_pos < 0) throw std::invalid_argument("neg_per_pos must be >= 0");
  const auto n = static_cast<UserId>(dataset.num_users());
  std::vector<std::size_t> degree(dataset.num_users(), 0);
  for (const Edge& e : train_edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::mt19937_64 rng(derive_seed(seed, "batches", static_cast<std::uint64_t>(epoch)));
  std::uniform_int_distribution<UserId> pick(0, n - 1);
  std::bernoulli_distribution flip(0.5);
  std::vector<LabeledPair> pairs;
  pairs.reserve(train_edges.size() * static_cast<std::size_t>(1 + neg_per_pos));
  for (const Edge& e : train_edges) {
    const bool swap = flip(rng);
    const UserId anchor = swap ? e.b : e.a;
    const UserId partner = swap ? e.a : e.b;
    pairs.push_back({anchor, partner, 1});
    if (neg_per_pos > 0 && degree[anchor] + 1 >= dataset.num_users()) {
      throw std::runtime_error("user " + dataset.users[anchor] +
                               " is train-linked to everyone; no negatives exist");
    }
    for (int k = 0; k < neg_per_pos; ++k) {
      UserId v;
      do {
        v = pick(rng);
      } while (v == anchor || contains(train_edges, make_edge(anchor, v)));
      pairs.push_back({anchor, v, 0});
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<std::vector<LabeledPair>> batches;
  for (std::size_t i = 0; i < pairs.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(pairs.size(), i + static_cast<std::size_t>(batch_size));
    batches.emplace_back(pairs.begin() + static_cast<std::ptrdiff_t>(i),
                         pairs.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

CandidateSet validation_candidates(const Dataset& dataset, std::uint64_t seed, int per_user) {
  if (dataset.val_edges.empty()) {
    CandidateSet empty;
    empty.split = "val";
    return empty;
  }
  std::vector<std::size_t> degree(dataset.num_users(), 0);
  for (const Edge& e : dataset.all_edges()) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::size_t feasible = static_cast<std::size_t>(per_user);
  for (const Edge& e : dataset.val_edges) {
    for (UserId u : {e.a, e.b}) {
      feasible = std::min(feasible, dataset.num_users() - 1 - degree[u]);
    }
  }
  CandidateSet set = sample_eval_candidates(dataset, dataset.val_edges, static_cast<int>(feasible),
                                            derive_seed(seed, "val_candidates"));
  set.split = "val";
  return set;
}

namespace {

std::string describe_batch(const Dataset& ds, const std::vector<LabeledPair>& batch) {
  std::ostringstream os;
  os << "batch of " << batch.size() << " pairs:";
  for (const LabeledPair& p : batch) {
    os << " (" << ds.users[p.m] << "," << ds.users[p.n] << "," << p.label << ")";
  }
  return os.str();
}

double validation_auc(const Model& model, const CandidateSet& val) {
  if (val.pools.empty()) return std::numeric_limits<double>::quiet_NaN();
  return auc(build_ranking(model, val));
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  const std::string fingerprint = dataset_fingerprint(dataset);
  Model model(dataset, config);
  Adam adam(AdamOptions{.lr = config.lr});
  std::mt19937_64 dropout_rng(derive_seed(config.seed, "dropout"));
  const CandidateSet val = validation_candidates(dataset, config.seed);

  TrainResult result;
  result.initial_val_auc = validation_auc(model, val);
  result.best = make_checkpoint(model, 0, result.initial_val_auc, fingerprint);
  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = make_training_batches(dataset.train_edges, dataset, config.neg_per_pos,
                                               config.seed, epoch, config.batch_size);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      ad::Tape tape;
      ad::Var loss = model.total_loss(tape, batch, true, &dropout_rng);
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + "; " +
                                 describe_batch(dataset, batch));
      }
      tape.backward(loss);
      adam.step(model.params());
      loss_sum += value;
    }
    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = batches.empty() ? 0.0 : loss_sum / static_cast<double>(batches.size());
    log.val_auc = validation_auc(model, val);
    // Without validation data the latest epoch wins.
    log.improved = std::isnan(log.val_auc) || !(log.val_auc <= result.best.val_auc);
    if (log.improved) {
      result.best = make_checkpoint(model, epoch, log.val_auc, fingerprint);
      since_best = 0;
    } else {
      ++since_best;
    }
    log.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (since_best >= config.patience) break;
  }
  return result;
}

}  // namespace mvmn
