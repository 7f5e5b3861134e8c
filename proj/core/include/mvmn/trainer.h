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

#ifndef MVMN_TRAINER_H_
#define MVMN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "mvmn/checkpoint.h"
#include "mvmn/ingestion.h"
#include "mvmn/model.h"
#include "mvmn/types.h"

namespace mvmn {

// One epoch of labeled pairs: every training edge once as a positive with a
// random anchor end, followed by `neg_per_pos` users not train-linked to the
// anchor; shuffled and cut into batches. Depends only on (seed, epoch).
std::vector<std::vector<LabeledPair>> make_training_batches(const EdgeSet& train_edges,
                                                            const Dataset& dataset,
                                                            int neg_per_pos, std::uint64_t seed,
                                                            int epoch, int batch_size);

// Validation pools with min(per_user, feasible) negatives per user. Empty if
// there are no validation edges.
CandidateSet validation_candidates(const Dataset& dataset, std::uint64_t seed,
                                   int per_user = 50);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_auc = 0.0;
  double seconds = 0.0;
  bool improved = false;
};

struct TrainResult {
  Checkpoint best;
  double initial_val_auc = 0.0;
  std::vector<EpochLog> history;
};

// Adam on total_loss, validation AUC after every epoch, best checkpoint kept,
// early stop after config.patience epochs without improvement. Throws
// std::runtime_error with the offending batch if the loss is not finite.
TrainResult train(const Dataset& dataset, const ModelConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace mvmn

#endif  // MVMN_TRAINER_H_
