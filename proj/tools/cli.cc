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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.h"
#include "mvmn/analysis.h"
#include "mvmn/checkpoint.h"
#include "mvmn/dataset_io.h"
#include "mvmn/evaluation.h"
#include "mvmn/gradcheck.h"
#include "mvmn/ingestion.h"
#include "mvmn/model.h"
#include "mvmn/seeding.h"
#include "mvmn/synth.h"
#include "mvmn/trainer.h"

namespace mvmn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json();
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
  std::string checkins, edges, format = "gowalla_tsv", bbox, region, out, candidates_out;
  std::string time_binning = "hour_of_day";
  double min_fraction = 0.1;
  int min_friends = 1, min_checkins = 10, kmax = kDefaultKMax, per_user = 50;
  std::uint64_t seed = 0;
};

int run_preprocess(const PreprocessArgs& a, std::ostream& out) {
  RunManifest manifest("preprocess");
  PreprocessConfig cfg;
  cfg.format = parse_checkin_format(a.format);
  if (!a.bbox.empty() && !a.region.empty()) {
    throw std::invalid_argument("--bbox and --region are mutually exclusive");
  }
  if (!a.bbox.empty()) cfg.region = parse_bbox(a.bbox);
  if (!a.region.empty()) {
    cfg.region = region_preset(a.region);
    if (!cfg.region) throw std::invalid_argument("unknown region preset '" + a.region + "'");
  }
  if (cfg.region) {
    cfg.region->min_in_region_fraction = a.min_fraction;
    cfg.region->validate();
  }
  cfg.activity = {a.min_friends, a.min_checkins};
  cfg.k_max = a.kmax;
  if (a.time_binning == "hour_of_day") {
    cfg.time_binning = TimeBinning::kHourOfDay;
  } else if (a.time_binning == "hour_of_week") {
    cfg.time_binning = TimeBinning::kHourOfWeek;
  } else {
    throw std::invalid_argument("unknown time binning '" + a.time_binning + "'");
  }
  cfg.seed = a.seed;

  const auto rows = parse_checkins(fs::path(a.checkins), cfg.format);
  const auto edges = parse_edges(fs::path(a.edges));
  PreprocessStats stats;
  const Dataset ds = build_dataset(rows, edges, cfg, &stats);
  write_dataset(ds, fs::path(a.out));

  fs::path cand_path = a.candidates_out;
  if (cand_path.empty()) cand_path = fs::path(a.out).replace_extension(".candidates.json");
  const CandidateSet cands = sample_eval_candidates(ds, ds.test_edges, a.per_user,
                                                    derive_seed(a.seed, "test_candidates"));
  write_candidates(cands, cand_path);

  json stats_json = {{"raw_checkins", stats.raw_checkins}, {"raw_users", stats.raw_users},
                     {"raw_edges", stats.raw_edges},       {"region_users", stats.region_users},
                     {"users", stats.users},               {"locations", stats.locations},
                     {"checkins", stats.checkins},         {"edges", stats.edges},
                     {"train_edges", ds.train_edges.size()}, {"val_edges", ds.val_edges.size()},
                     {"test_edges", ds.test_edges.size()}, {"test_pairs", cands.num_pairs()}};
  manifest.set_config({{"format", a.format}, {"bbox", a.bbox}, {"region", a.region},
                       {"min_fraction", a.min_fraction}, {"min_friends", a.min_friends},
                       {"min_checkins", a.min_checkins}, {"kmax", a.kmax},
                       {"per_user", a.per_user}, {"time_binning", a.time_binning},
                       {"stats", stats_json}});
  manifest.set_seed(a.seed);
  manifest.add_input(a.checkins);
  manifest.add_input(a.edges);
  manifest.add_output(a.out);
  manifest.add_output(cand_path);
  manifest.write(a.out);
  out << "preprocess: " << stats.users << " users, " << stats.locations << " locations, "
      << stats.checkins << " check-ins, " << stats.edges << " edges (train "
      << ds.train_edges.size() << ", val " << ds.val_edges.size() << ", test "
      << ds.test_edges.size() << "), " << cands.num_pairs() << " test pairs\n";
  return 0;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string data, out, window_mode = "bucket";
  double window = 1.0;
  std::uint64_t seed = 0;
};

json similarity_json(const SimilarityStats& s) {
  return {{"mean", s.mean}, {"pairs_used", s.pairs_used}, {"pairs_skipped", s.pairs_skipped}};
}

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  RunManifest manifest("analyze");
  const Dataset ds = read_dataset(fs::path(a.data));
  CooccurrenceOptions opts;
  opts.window_hours = a.window;
  if (a.window_mode == "bucket") {
    opts.mode = CooccurrenceWindow::kBucket;
  } else if (a.window_mode == "sliding") {
    opts.mode = CooccurrenceWindow::kSliding;
  } else {
    throw std::invalid_argument("unknown window mode '" + a.window_mode + "'");
  }
  const AnalysisReport r = analyze(ds, derive_seed(a.seed, "analyze"), opts);
  const CooccurrenceStats& c = r.cooccurrence;
  const json report = {
      {"window_hours", a.window},
      {"window_mode", a.window_mode},
      {"N_L", c.n_l},
      {"N_L_S", c.n_l_s},
      {"N_LT", c.n_lt},
      {"N_LT_S", c.n_lt_s},
      {"SR", optional_number(c.sr)},
      {"STR", optional_number(c.str)},
      {"frame_similarity",
       {{"linked", similarity_json(r.frame_linked)}, {"unlinked", similarity_json(r.frame_unlinked)}}},
      {"gap_similarity",
       {{"linked", similarity_json(r.gap_linked)}, {"unlinked", similarity_json(r.gap_unlinked)}}}};
  write_json(a.out, report);
  manifest.set_config({{"window", a.window}, {"window_mode", a.window_mode}});
  manifest.set_seed(a.seed);
  manifest.add_input(a.data);
  manifest.add_output(a.out);
  manifest.write(a.out);
  auto pct = [](const std::optional<double>& v) {
    return v ? std::to_string(100.0 * *v) + "%" : std::string("undefined");
  };
  out << "analyze: SR " << pct(c.sr) << ", STR " << pct(c.str) << ", frame similarity linked "
      << r.frame_linked.mean << " vs unlinked " << r.frame_unlinked.mean << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data, out, config, variant;
  std::vector<std::string> disable_views;
  std::optional<double> beta, lr, dropout;
  std::optional<int> gat_depth, heads, epochs, patience, batch_size, neg_per_pos, embed_dim,
      hidden_dim, fusion_hidden, gat_score_hidden;
  std::uint64_t seed = 0;
  bool quiet = false;
};

ModelConfig resolve_model_config(const TrainArgs& a, int k_max) {
  ModelConfig c;
  if (!a.config.empty()) c = model_config_from_json(read_json(a.config));
  c.k_max = k_max;
  c.seed = a.seed;
  if (!a.variant.empty()) c.views = view_preset(a.variant);
  for (const std::string& v : a.disable_views) {
    if (v == "location") {
      c.views.location = false;
    } else if (v == "temporal") {
      c.views.temporal = false;
    } else if (v == "pp_loss" || v == "pp") {
      c.views.pp_loss = false;
    } else if (v == "relation") {
      c.views.relation = false;
    } else {
      throw std::invalid_argument("unknown view '" + v + "'");
    }
  }
  if (a.beta) c.beta = *a.beta;
  if (a.lr) c.lr = *a.lr;
  if (a.dropout) c.dropout = *a.dropout;
  if (a.gat_depth) c.gat_depth = *a.gat_depth;
  if (a.heads) c.heads = *a.heads;
  if (a.epochs) c.epochs = *a.epochs;
  if (a.patience) c.patience = *a.patience;
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (a.neg_per_pos) c.neg_per_pos = *a.neg_per_pos;
  if (a.embed_dim) c.embed_dim = *a.embed_dim;
  if (a.hidden_dim) c.hidden_dim = *a.hidden_dim;
  if (a.fusion_hidden) c.fusion_hidden = *a.fusion_hidden;
  if (a.gat_score_hidden) c.gat_score_hidden = *a.gat_score_hidden;
  if (c.beta == 0.0) c.views.pp_loss = false;
  c.validate();
  return c;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  RunManifest manifest("train");
  const Dataset ds = read_dataset(fs::path(a.data));
  const ModelConfig config = resolve_model_config(a, ds.k_max);
  auto log = [&](const EpochLog& e) {
    if (a.quiet) return;
    char line[160];
    std::snprintf(line, sizeof line, "epoch %3d  loss %.5f  val_auc %.4f  %.1fs%s\n", e.epoch,
                  e.mean_loss, e.val_auc, e.seconds, e.improved ? "  *" : "");
    out << line << std::flush;
  };
  const TrainResult result = train(ds, config, log);
  write_checkpoint(fs::path(a.out), result.best);

  json history = json::array();
  for (const EpochLog& e : result.history) {
    history.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss},
                       {"val_auc", std::isfinite(e.val_auc) ? json(e.val_auc) : json()}});
  }
  fs::path history_path = a.out;
  history_path += ".history.json";
  write_json(history_path,
             {{"initial_val_auc",
               std::isfinite(result.initial_val_auc) ? json(result.initial_val_auc) : json()},
              {"best_epoch", result.best.epoch},
              {"epochs", history}});
  manifest.set_config(to_json(config));
  manifest.set_seed(a.seed);
  manifest.add_input(a.data);
  manifest.add_output(a.out);
  manifest.add_output(history_path);
  manifest.write(a.out);
  out << "train: best epoch " << result.best.epoch << ", val_auc " << result.best.val_auc
      << " (untrained " << result.initial_val_auc << ")\n";
  return 0;
}

// ---- evaluate / predict ---------------------------------------------------

Model load_model(const Checkpoint& ckpt, const Dataset& ds) {
  const std::string fp = dataset_fingerprint(ds);
  if (ckpt.dataset_fingerprint != fp) {
    throw std::runtime_error("checkpoint was trained on dataset " + ckpt.dataset_fingerprint +
                             ", not " + fp);
  }
  return Model(ds, ckpt.config, ckpt.params);
}

struct EvaluateArgs {
  std::string checkpoint, data, candidates, out;
  int k = 10;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  RunManifest manifest("evaluate");
  const Dataset ds = read_dataset(fs::path(a.data));
  const Checkpoint ckpt = read_checkpoint(fs::path(a.checkpoint));
  const CandidateSet cands = read_candidates(fs::path(a.candidates));
  if (cands.dataset_fingerprint != dataset_fingerprint(ds)) {
    throw std::runtime_error("candidates were sampled from a different dataset");
  }
  const Model model = load_model(ckpt, ds);
  const MetricsReport report = evaluate(model, cands, a.k);
  json j = to_json(report);
  j["split"] = cands.split;
  write_json(a.out, j);
  manifest.set_config({{"k", a.k}, {"model", to_json(ckpt.config)}});
  manifest.set_seed(ckpt.seed);
  manifest.add_input(a.checkpoint);
  manifest.add_input(a.data);
  manifest.add_input(a.candidates);
  manifest.add_output(a.out);
  manifest.write(a.out);
  out << "evaluate: AUC " << report.auc << ", P@" << a.k << " " << report.precision_at_k
      << ", R@" << a.k << " " << report.recall_at_k << " over " << report.users << " users, "
      << report.pairs << " pairs\n";
  return 0;
}

struct PredictArgs {
  std::string checkpoint, data, pair;
};

int run_predict(const PredictArgs& a, std::ostream& out) {
  const Dataset ds = read_dataset(fs::path(a.data));
  const Checkpoint ckpt = read_checkpoint(fs::path(a.checkpoint));
  const Model model = load_model(ckpt, ds);
  const auto comma = a.pair.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--pair expects U1,U2");
  auto lookup = [&ds](const std::string& raw) {
    const auto it = std::find(ds.users.begin(), ds.users.end(), raw);
    if (it == ds.users.end()) throw std::invalid_argument("unknown user '" + raw + "'");
    return static_cast<UserId>(it - ds.users.begin());
  };
  const UserId m = lookup(a.pair.substr(0, comma));
  const UserId n = lookup(a.pair.substr(comma + 1));
  if (m == n) throw std::invalid_argument("--pair needs two different users");
  const auto [y_hat, pp] = model.score_pair(m, n);
  char line[96];
  std::snprintf(line, sizeof line, "%.17g\n", y_hat);
  out << line;
  (void)pp;
  return 0;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
  int seeds = 5, samples = 12;
  double h = 1e-5, tolerance = 1e-4;
  std::uint64_t seed = 1;
  std::string out;
};

int run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradcheckOptions opts;
  opts.seeds = a.seeds;
  opts.samples = a.samples;
  opts.h = a.h;
  opts.base_seed = a.seed;
  const GradcheckReport r = mvmn::run_gradcheck(opts);
  char line[128];
  for (const GroupCheck& g : r.groups) {
    std::snprintf(line, sizeof line, "%-8s max_rel_error %.3e  max_abs_error %.3e  (%d coords)\n",
                  g.group.c_str(), g.max_rel_error, g.max_abs_error, g.checked);
    out << line;
  }
  const bool ok = r.max_rel_error < a.tolerance;
  std::snprintf(line, sizeof line, "gradcheck: %s, max relative error %.3e over %d seeds\n",
                ok ? "ok" : "FAILED", r.max_rel_error, r.seeds);
  out << line;
  if (!a.out.empty()) {
    json j = to_json(r);
    j["tolerance"] = a.tolerance;
    write_json(a.out, j);
  }
  return ok ? 0 : 1;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string config, out_checkins, out_edges;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  RunManifest manifest("synth");
  SynthConfig cfg;
  if (!a.config.empty()) {
    cfg = synth_config_from_json(read_json(a.config));
    manifest.add_input(a.config);
  }
  if (a.seed) cfg.seed = *a.seed;
  const SynthOutput gen = generate(cfg);
  write_text(a.out_checkins, gen.checkins);
  write_text(a.out_edges, gen.edges);
  manifest.set_config(to_json(cfg));
  manifest.set_seed(cfg.seed);
  manifest.add_output(a.out_checkins);
  manifest.add_output(a.out_edges);
  manifest.write(a.out_checkins);
  out << "synth: " << cfg.num_users() << " users, " << gen.num_checkins << " check-ins, "
      << gen.num_edges << " edges\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view social link inference from check-in data", "mvmn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  int threads = 1;
  app.add_option("--threads", threads, "Parallelism cap (this build runs single-threaded)")
      ->check(CLI::PositiveNumber);

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Filter raw check-ins and edges into a dataset");
  p->add_option("--checkins", pre.checkins, "Check-in file (TSV)")->required()->check(CLI::ExistingFile);
  p->add_option("--edges", pre.edges, "Edge file (TSV)")->required()->check(CLI::ExistingFile);
  p->add_option("--format", pre.format, "gowalla_tsv or foursquare_tsv")->capture_default_str();
  p->add_option("--bbox", pre.bbox, "Region as latmin,latmax,lonmin,lonmax");
  p->add_option("--region", pre.region, "Region preset (nyc, la)");
  p->add_option("--min-fraction", pre.min_fraction, "Minimum in-region share of check-ins")
      ->capture_default_str();
  p->add_option("--min-friends", pre.min_friends)->capture_default_str()->check(CLI::NonNegativeNumber);
  p->add_option("--min-checkins", pre.min_checkins)->capture_default_str()->check(CLI::NonNegativeNumber);
  p->add_option("--kmax", pre.kmax, "Trajectory length cap")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--time-binning", pre.time_binning, "hour_of_day or hour_of_week")->capture_default_str();
  p->add_option("--per-user", pre.per_user, "Sampled negatives per test user")->capture_default_str();
  p->add_option("--seed", pre.seed)->capture_default_str();
  p->add_option("--out", pre.out, "Dataset output (JSONL)")->required();
  p->add_option("--candidates-out", pre.candidates_out,
                "Test candidate pools (default: <out>.candidates.json)");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Co-occurrence ratios and temporal similarities");
  a->add_option("--data", an.data)->required()->check(CLI::ExistingFile);
  a->add_option("--out", an.out)->required();
  a->add_option("--window", an.window, "Time window in hours")->capture_default_str()->check(CLI::PositiveNumber);
  a->add_option("--window-mode", an.window_mode, "bucket or sliding")->capture_default_str();
  a->add_option("--seed", an.seed)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model and write the best checkpoint");
  t->add_option("--data", tr.data)->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--config", tr.config, "Model config JSON")->check(CLI::ExistingFile);
  t->add_option("--variant", tr.variant, "full, v1, v2, v3, v4, location, temporal, relation");
  t->add_option("--disable-view", tr.disable_views, "location, temporal, pp_loss, relation");
  t->add_option("--beta", tr.beta, "Point-process loss weight");
  t->add_option("--lr", tr.lr);
  t->add_option("--dropout", tr.dropout);
  t->add_option("--gat-depth", tr.gat_depth);
  t->add_option("--heads", tr.heads);
  t->add_option("--epochs", tr.epochs);
  t->add_option("--patience", tr.patience);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--neg-per-pos", tr.neg_per_pos);
  t->add_option("--embed-dim", tr.embed_dim);
  t->add_option("--hidden-dim", tr.hidden_dim);
  t->add_option("--fusion-hidden", tr.fusion_hidden);
  t->add_option("--gat-score-hidden", tr.gat_score_hidden);
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_flag("--quiet", tr.quiet, "No per-epoch log");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Ranking metrics on candidate pools");
  e->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
  e->add_option("--candidates", ev.candidates)->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out)->required();
  e->add_option("--k", ev.k)->capture_default_str()->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto* d = app.add_subcommand("predict", "Score one user pair");
  d->add_option("--checkpoint", pr.checkpoint)->required()->check(CLI::ExistingFile);
  d->add_option("--data", pr.data)->required()->check(CLI::ExistingFile);
  d->add_option("--pair", pr.pair, "Raw user ids U1,U2")->required();

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the full model");
  g->add_option("--seeds", gc.seeds)->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--samples", gc.samples, "Coordinates per parameter (0: all)")->capture_default_str();
  g->add_option("--step", gc.h, "Finite-difference step")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--tolerance", gc.tolerance)->capture_default_str();
  g->add_option("--seed", gc.seed)->capture_default_str();
  g->add_option("--out", gc.out, "Optional JSON report");

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Generate a synthetic check-in network");
  s->add_option("--config", sy.config, "Synth config JSON")->check(CLI::ExistingFile);
  s->add_option("--seed", sy.seed, "Overrides the config seed");
  s->add_option("--out-checkins", sy.out_checkins)->required();
  s->add_option("--out-edges", sy.out_edges)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (p->parsed()) return run_preprocess(pre, out);
    if (a->parsed()) return run_analyze(an, out);
    if (t->parsed()) return run_train(tr, out);
    if (e->parsed()) return run_evaluate(ev, out);
    if (d->parsed()) return run_predict(pr, out);
    if (g->parsed()) return run_gradcheck(gc, out);
    if (s->parsed()) return run_synth(sy, out);
  } catch (const std::exception& ex) {
    err << "mvmn: error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace mvmn::cli
