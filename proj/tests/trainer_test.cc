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

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mvmn/adam.h"
#include "mvmn/checkpoint.h"
#include "mvmn/evaluation.h"
#include "mvmn/gradcheck.h"
#include "mvmn/ingestion.h"
#include "mvmn/synth.h"
#include "mvmn/trainer.h"

namespace mvmn {
namespace {

Dataset random_graph_dataset(int users, int edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.locations = {"x"};
  for (int u = 0; u < users; ++u) {
    ds.users.push_back(std::to_string(u));
    ds.trajectories.push_back(Trajectory{u, {{0, 0}}});
  }
  EdgeSet all;
  while (static_cast<int>(all.size()) < edges) {
    const auto a = static_cast<UserId>(rng() % users), b = static_cast<UserId>(rng() % users);
    if (a == b) continue;
    all.push_back(make_edge(a, b));
    normalize(all);
  }
  ds.train_edges = all;
  ds.build_adjacency();
  return ds;
}

Dataset planted(std::uint64_t seed) {
  SynthConfig sc;
  sc.communities = 4;
  sc.users_per_community = 20;
  sc.locations_per_community = 10;
  sc.global_locations = 20;
  sc.p_in = 0.25;
  sc.p_out = 0.005;
  sc.seed = seed;
  SynthOutput out = generate(sc);
  std::istringstream ci(out.checkins), ei(out.edges);
  PreprocessConfig pc;
  pc.seed = seed;
  return build_dataset(parse_checkins(ci, CheckinFormat::kGowallaTsv), parse_edges(ei), pc);
}

ModelConfig small_config(const Dataset& ds) {
  ModelConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.fusion_hidden = 16;
  c.k_max = ds.k_max;
  return c;
}

TEST(TrainingBatches, CountsAndShapes) {
  Dataset ds = random_graph_dataset(50, 10, 1);
  auto batches = make_training_batches(ds.train_edges, ds, 4, 7, 1, 64);
  std::size_t pairs = 0, positives = 0;
  for (const auto& b : batches) {
    EXPECT_LE(b.size(), 64u);
    pairs += b.size();
    for (const auto& p : b) positives += p.label;
  }
  EXPECT_EQ(pairs, 50u);
  EXPECT_EQ(positives, 10u);
  EXPECT_EQ(batches.size(), 1u);
  EXPECT_EQ(make_training_batches(ds.train_edges, ds, 4, 7, 1, 16).size(), 4u);
}

TEST(TrainingBatches, NegativesAreNeverTrainLinked) {
  Dataset ds = random_graph_dataset(120, 300, 2);
  std::size_t negatives = 0;
  for (int epoch = 1; negatives < 100000; ++epoch) {
    for (const auto& b : make_training_batches(ds.train_edges, ds, 4, 3, epoch, 64)) {
      for (const auto& p : b) {
        EXPECT_NE(p.m, p.n);
        if (p.label == 1) {
          EXPECT_TRUE(contains(ds.train_edges, make_edge(p.m, p.n)));
        } else {
          ++negatives;
          if (contains(ds.train_edges, make_edge(p.m, p.n))) FAIL() << p.m << "," << p.n;
        }
      }
    }
  }
}

TEST(TrainingBatches, DeterministicPerEpochAndResampled) {
  Dataset ds = random_graph_dataset(1000, 400, 3);
  auto e1 = make_training_batches(ds.train_edges, ds, 4, 11, 1, 64);
  EXPECT_EQ(e1, make_training_batches(ds.train_edges, ds, 4, 11, 1, 64));
  auto e2 = make_training_batches(ds.train_edges, ds, 4, 11, 2, 64);
  std::set<std::pair<UserId, UserId>> n1, n2;
  for (const auto& b : e1) {
    for (const auto& p : b) {
      if (!p.label) n1.insert({p.m, p.n});
    }
  }
  for (const auto& b : e2) {
    for (const auto& p : b) {
      if (!p.label) n2.insert({p.m, p.n});
    }
  }
  std::size_t shared = 0;
  for (const auto& p : n1) shared += n2.count(p);
  // Expected overlap is about 1600 * 1600 / (1000 * 999) pairs.
  EXPECT_LT(shared, 20u);
  EXPECT_NE(e1, make_training_batches(ds.train_edges, ds, 4, 12, 1, 64));
}

TEST(TrainingBatches, AnchorLinkedToEveryone) {
  Dataset ds = random_graph_dataset(3, 3, 4);
  EXPECT_THROW(make_training_batches(ds.train_edges, ds, 4, 1, 1, 64), std::runtime_error);
}

TEST(ValidationCandidates, UsesValSplit) {
  Dataset ds = planted(1);
  CandidateSet c = validation_candidates(ds, 5);
  EXPECT_EQ(c.split, "val");
  std::size_t positives = 0;
  for (const auto& p : c.pools) {
    positives += p.positives.size();
    for (UserId q : p.positives) EXPECT_TRUE(contains(ds.val_edges, make_edge(p.user, q)));
  }
  EXPECT_EQ(positives, 2 * ds.val_edges.size());
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  Dataset ds = planted(2);
  ModelConfig c = small_config(ds);
  c.epochs = 0;
  TrainResult r = train(ds, c);
  EXPECT_EQ(r.best.epoch, 0);
  EXPECT_TRUE(r.history.empty());
  Model fresh(ds, c);
  for (std::size_t i = 0; i < fresh.params().size(); ++i) {
    EXPECT_EQ(r.best.params.at(i).value, fresh.params().at(i).value);
  }
  EXPECT_EQ(r.best.val_auc, r.initial_val_auc);
}

TEST(Train, BitwiseReproducible) {
  Dataset ds = planted(3);
  ModelConfig c = small_config(ds);
  c.epochs = 2;
  TrainResult a = train(ds, c);
  TrainResult b = train(ds, c);
  std::stringstream sa, sb;
  write_checkpoint(sa, a.best);
  write_checkpoint(sb, b.best);
  EXPECT_EQ(sa.str(), sb.str());
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].mean_loss, b.history[i].mean_loss);
    EXPECT_EQ(a.history[i].val_auc, b.history[i].val_auc);
  }
}

TEST(Train, ImprovesOnPlantedData) {
  Dataset ds = planted(4);
  ModelConfig c = small_config(ds);
  c.epochs = 50;
  c.lr = 1e-3;
  TrainResult r = train(ds, c);
  EXPECT_GT(r.best.val_auc, r.initial_val_auc);
  EXPECT_GT(r.best.epoch, 0);
  EXPECT_LE(r.history.size(), 50u);
  // Early stopping leaves exactly `patience` non-improving epochs at the end.
  if (r.history.size() < 50u) {
    EXPECT_EQ(static_cast<int>(r.history.size()) - r.best.epoch, c.patience);
  }
}

TEST(Train, LossTrendsDownOverFirstSteps) {
  int down = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Dataset ds = toy_dataset(seed);
    ModelConfig c = small_config(ds);
    c.seed = seed;
    Model m(ds, c);
    Adam adam(AdamOptions{c.lr});
    std::mt19937_64 rng(seed);
    const std::vector<LabeledPair> batch = {{0, 1, 1}, {0, 3, 0}, {1, 2, 1}, {2, 5, 0},
                                            {3, 4, 1}, {1, 5, 0}, {4, 5, 1}, {0, 4, 0}};
    std::vector<double> losses;
    for (int step = 0; step < 20; ++step) {
      ad::Tape tape;
      ad::Var l = m.total_loss(tape, batch, true, &rng);
      losses.push_back(l.scalar());
      tape.backward(l);
      adam.step(m.params());
    }
    const double head = (losses[0] + losses[1] + losses[2] + losses[3] + losses[4]) / 5;
    const double tail = (losses[15] + losses[16] + losses[17] + losses[18] + losses[19]) / 5;
    down += tail < head;
  }
  EXPECT_GE(down, 2);
}

}  // namespace
}  // namespace mvmn
