// Copyright 2026 The CMSC Authors.
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

// Command-line front end: gen, train, predict, baseline, eval, evalset,
// trails and gradcheck.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmsc/bseq.hpp"
#include "cmsc/checkpoint.hpp"
#include "cmsc/keyvalue.hpp"
#include "cmsc/pipeline.hpp"
#include "cmsc/trail.hpp"

namespace {

using namespace cmsc;
namespace pl = cmsc::pipeline;

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<BoundaryImage> slice(const std::vector<BoundaryImage>& frames, int offset, int count,
                                 const char* what) {
  if (offset < 0 || count < 0 || offset + count > static_cast<int>(frames.size())) {
    throw ConfigError(std::string(what) + ": frames [" + std::to_string(offset) + ", " +
                      std::to_string(offset + count) + ") out of range for a " +
                      std::to_string(frames.size()) + "-frame sequence");
  }
  return {frames.begin() + offset, frames.begin() + offset + count};
}

struct GenArgs {
  std::string preset = "desk";
  int balls = 0;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out;
  bool f32 = false;
};

int run_gen(const GenArgs& a) {
  pl::GenOptions opt;
  opt.sim = pl::sim_preset(a.preset);
  if (a.balls > 0) {
    opt.sim.n_balls = a.balls;
    if (a.balls > 1) opt.sim.max_wall_collisions = 0;
  }
  opt.count = a.count;
  opt.seed = a.seed;
  opt.out_dir = a.out;
  opt.dtype = a.f32 ? io::BseqDtype::kF32 : io::BseqDtype::kU8;
  const auto entries = pl::generate_dataset(opt);
  std::printf("wrote %zu sequences to %s\n", entries.size(), a.out.c_str());
  return pl::kExitOk;
}

struct TrainArgs {
  std::vector<std::string> data;
  std::string config;
  std::string preset = "desk";
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string init;
  bool blind = false;
  std::string out;
  std::string log;
  bool verbose = false;
};

int run_train(const TrainArgs& a) {
  pl::TrainConfig cfg = pl::TrainConfig::preset(a.preset);
  if (!a.config.empty()) cfg = pl::TrainConfig::from_kv(KeyValues::load_file(a.config), cfg);
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.init.empty()) cfg.init_checkpoint = a.init;
  if (a.blind) cfg.blind = true;
  cfg.validate();

  std::vector<pl::Dataset> parts;
  for (const auto& dir : a.data) parts.push_back(pl::load_dataset(dir, cfg.blind));
  const pl::Dataset data = pl::merge(std::move(parts));

  io::Checkpoint warm;
  std::string lineage = cfg.blind ? "blind" : "scratch";
  if (!cfg.init_checkpoint.empty()) {
    warm = io::load_checkpoint_file(cfg.init_checkpoint);
    lineage = "init:" + cfg.init_checkpoint + (warm.lineage.empty() ? "" : " <- " + warm.lineage);
  }
  pl::ProgressFn progress;
  if (a.verbose) {
    progress = [](const pl::TrainProgress& p) {
      if (p.step % 50 == 0) {
        std::fprintf(stderr, "epoch %d step %lld loss %.6f\n", p.epoch,
                     static_cast<long long>(p.step), p.loss);
      }
    };
  }
  const pl::TrainResult result = pl::train(
      cfg, data, cfg.init_checkpoint.empty() ? nullptr : &warm, progress, lineage);
  io::save_checkpoint_file(a.out, result.checkpoint);
  const std::string log = pl::format_loss_log(result.epochs);
  write_text(a.log.empty() ? a.out + ".log" : a.log, log);
  std::fputs(log.c_str(), stdout);
  return pl::kExitOk;
}

struct PredictArgs {
  std::string ckpt;
  std::string input;
  int steps = 10;
  int offset = 0;
  bool blind = false;
  std::string out;
};

int run_predict(const PredictArgs& a, bool baseline) {
  std::vector<BoundaryImage> frames = io::load_bseq(a.input);
  if (a.blind) {
    for (auto& f : frames) f = sim::strip_border(f);
  }
  std::vector<BoundaryImage> out;
  if (baseline) {
    out = pl::baseline_last_input(slice(frames, 0, a.offset + 1, "baseline"), a.steps);
  } else {
    const io::Checkpoint ckpt = io::load_checkpoint_file(a.ckpt);
    const int n = ckpt.model.config.n_frames;
    const auto seed = slice(frames, a.offset, n, "predict");
    pl::RolloutStats stats;
    out = pl::rollout(ckpt.model, seed, a.steps, &stats);
    std::printf("%d steps, %lld patch predictions\n", a.steps,
                static_cast<long long>(stats.patch_predictions));
  }
  io::save_bseq(a.out, out, io::BseqDtype::kF32);
  return pl::kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  int gt_offset = -1;
  int tol = 1;
  std::string mask;
  bool confidence = false;
  int ignore_border = 0;
  std::string csv;
};

int run_eval(const EvalArgs& a) {
  const auto pred = io::load_bseq(a.pred);
  auto gt = io::load_bseq(a.gt);
  if (a.gt_offset >= 0) gt = slice(gt, a.gt_offset, static_cast<int>(pred.size()), "eval");
  pl::PairEvalOptions opt;
  opt.tol = a.tol;
  opt.ignore_border = a.ignore_border;
  opt.confidence = a.confidence;
  if (!a.mask.empty()) opt.mask = io::load_bseq(a.mask);
  const auto rows = pl::evaluate_pair(pred, gt, opt);
  std::fputs(eval::format_table(rows).c_str(), stdout);
  if (!a.csv.empty()) write_text(a.csv, eval::format_csv(rows));
  return pl::kExitOk;
}

struct EvalSetArgs {
  std::string ckpt;
  std::string data;
  bool baseline = false;
  int n_frames = 4;
  int horizon = 10;
  int stride = 1;
  int tol = 1;
  int ignore_border = 1;
  bool blind = false;
  bool teacher_forced = false;
  std::string csv;
};

int run_evalset(const EvalSetArgs& a) {
  const pl::Dataset data = pl::load_dataset(a.data, a.blind);
  pl::RolloutEvalOptions opt;
  opt.horizon = a.horizon;
  opt.start_stride = a.stride;
  opt.tol = a.tol;
  opt.ignore_border = a.ignore_border;
  opt.teacher_forced = a.teacher_forced;
  pl::RolloutEvalResult result;
  if (a.baseline) {
    opt.n_frames = a.n_frames;
    result = pl::evaluate_rollouts(pl::last_input_predictor(), data, opt);
  } else {
    const io::Checkpoint ckpt = io::load_checkpoint_file(a.ckpt);
    opt.n_frames = ckpt.model.config.n_frames;
    result = pl::evaluate_rollouts(pl::model_predictor(ckpt.model), data, opt);
  }
  std::vector<eval::MetricRow> rows;
  for (std::size_t k = 0; k < result.per_step.size(); ++k) {
    const int step = static_cast<int>(k) + 1;
    rows.push_back({step, "best_f", result.per_step[k].best_f});
    rows.push_back({step, "auc", result.per_step[k].auc});
    rows.push_back({step, "mse", result.mse[k]});
  }
  std::printf("%zu rollout starts\n", result.starts);
  std::fputs(eval::format_table(rows).c_str(), stdout);
  if (!a.csv.empty()) write_text(a.csv, eval::format_csv(rows));
  return pl::kExitOk;
}

int run_trails(const std::string& input, const std::string& out) {
  const auto frames = io::load_bseq(input);
  const auto bytes = io::encode_trail(frames);
  io::write_file(out, bytes);
  return pl::kExitOk;
}

int run_gradcheck(int seeds) {
  const auto lines = pl::run_gradcheck_suite(seeds);
  bool ok = true;
  for (const auto& l : lines) {
    std::printf("%-18s max_rel_err=%.3e coords=%zu skipped=%zu %s%s\n", l.name.c_str(),
                l.max_rel_error, l.coords, l.skipped, l.passed ? "ok" : "FAIL", l.expect_failure ? " (negative control)" : "");
    ok = ok && l.passed;
  }
  return ok ? pl::kExitOk : pl::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale context boundary prediction"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate billiard sequences");
  gen_cmd->add_option("--preset", gen.preset, "single, multi or desk")->capture_default_str();
  gen_cmd->add_option("--balls", gen.balls, "Balls per world (overrides the preset)");
  gen_cmd->add_option("--count", gen.count, "Number of sequences")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Run seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_flag("--f32", gen.f32, "Store frames as float32");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--data", tr.data, "Dataset directory (repeatable)")->required();
  train_cmd->add_option("--config", tr.config, "key=value config file");
  train_cmd->add_option("--preset", tr.preset, "desk, desk-nocontext, full or full-n6")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Run seed")->each([&](const std::string&) {
    tr.seed_set = true;
  });
  train_cmd->add_option("--init", tr.init, "Warm-start checkpoint");
  train_cmd->add_flag("--blind", tr.blind, "Strip the table border from all frames");
  train_cmd->add_option("--out", tr.out, "Output checkpoint")->required();
  train_cmd->add_option("--log", tr.log, "Loss log path (default <out>.log)");
  train_cmd->add_flag("-v,--verbose", tr.verbose, "Print step losses");

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Recursive full-frame rollout");
  predict_cmd->add_option("--ckpt", pr.ckpt, "Checkpoint")->required();
  predict_cmd->add_option("--input", pr.input, "Seed sequence (.bseq)")->required();
  predict_cmd->add_option("--steps", pr.steps, "Frames to predict")->capture_default_str();
  predict_cmd->add_option("--offset", pr.offset, "Index of the first seed frame")
      ->capture_default_str();
  predict_cmd->add_flag("--blind", pr.blind, "Strip the table border from the input");
  predict_cmd->add_option("--out", pr.out, "Output .bseq")->required();

  PredictArgs bl;
  auto* baseline_cmd = app.add_subcommand("baseline", "Repeat the last input frame");
  baseline_cmd->add_option("--input", bl.input, "Seed sequence (.bseq)")->required();
  baseline_cmd->add_option("--steps", bl.steps, "Frames to emit")->capture_default_str();
  baseline_cmd->add_option("--offset", bl.offset, "Index of the last seed frame")
      ->capture_default_str();
  baseline_cmd->add_option("--out", bl.out, "Output .bseq")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Predicted frames (.bseq)")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth frames (.bseq)")->required();
  eval_cmd->add_option("--gt-offset", ev.gt_offset,
                       "Compare against gt frames starting at this index");
  eval_cmd->add_option("--tol", ev.tol, "Match tolerance in pixels")->capture_default_str();
  eval_cmd->add_option("--mask", ev.mask, "Mask frames (.bseq); zero pixels are ignored");
  eval_cmd->add_flag("--confidence", ev.confidence, "Report AUC for confidence ground truth");
  eval_cmd->add_option("--ignore-border", ev.ignore_border, "Outer pixel rings to ignore")
      ->capture_default_str();
  eval_cmd->add_option("--csv", ev.csv, "Write step,metric,value CSV");

  EvalSetArgs es;
  auto* evalset_cmd = app.add_subcommand("evalset", "Rollout evaluation over a dataset");
  auto* es_ckpt = evalset_cmd->add_option("--ckpt", es.ckpt, "Checkpoint");
  evalset_cmd->add_flag("--baseline", es.baseline, "Score the last-input baseline")
      ->excludes(es_ckpt);
  evalset_cmd->add_option("--data", es.data, "Dataset directory")->required();
  evalset_cmd->add_option("--n", es.n_frames, "Seed frames for the baseline")
      ->capture_default_str();
  evalset_cmd->add_option("--horizon", es.horizon, "Steps per rollout")->capture_default_str();
  evalset_cmd->add_option("--stride", es.stride, "Distance between start frames")
      ->capture_default_str();
  evalset_cmd->add_option("--tol", es.tol, "Match tolerance in pixels")->capture_default_str();
  evalset_cmd->add_option("--ignore-border", es.ignore_border, "Outer pixel rings to ignore")
      ->capture_default_str();
  evalset_cmd->add_flag("--blind", es.blind, "Strip the table border from all frames");
  evalset_cmd->add_flag("--teacher-forced", es.teacher_forced,
                        "Feed ground truth between steps");
  evalset_cmd->add_option("--csv", es.csv, "Write step,metric,value CSV");

  std::string trail_in, trail_out;
  auto* trails_cmd = app.add_subcommand("trails", "Superimpose frames into a PGM trail");
  trails_cmd->add_option("--input", trail_in, "Frames (.bseq)")->required();
  trails_cmd->add_option("--out", trail_out, "Output .pgm")->required();

  int gc_seeds = 10;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gradcheck_cmd->add_option("--seeds", gc_seeds, "Random seeds per check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pl::kExitOk : pl::kExitConfig;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) return run_train(tr);
    if (*predict_cmd) return run_predict(pr, false);
    if (*baseline_cmd) return run_predict(bl, true);
    if (*eval_cmd) return run_eval(ev);
    if (*evalset_cmd) {
      if (!es.baseline && es.ckpt.empty()) throw ConfigError("evalset: need --ckpt or --baseline");
      return run_evalset(es);
    }
    if (*trails_cmd) return run_trails(trail_in, trail_out);
    if (*gradcheck_cmd) return run_gradcheck(gc_seeds);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pl::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pl::kExitFailure;
  }
  return pl::kExitOk;
}
