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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmsc/billiard.hpp"
#include "cmsc/bseq.hpp"
#include "cmsc/checkpoint.hpp"
#include "cmsc/image.hpp"
#include "cmsc/metrics.hpp"
#include "cmsc/model.hpp"

namespace cmsc::pipeline {

// Process exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;    // a check (e.g. gradcheck) failed
inline constexpr int kExitConfig = 2;     // bad flags, config or shapes
inline constexpr int kExitIo = 3;         // unreadable/unwritable or corrupt files
inline constexpr int kExitNumerical = 4;  // NaN/Inf or infeasible numerics

int exit_code_for(const Error& e);

// ------------------------------------------------------------------ datasets

struct ManifestEntry {
  std::string file;
  std::uint64_t seed = 0;
  int n_balls = 0;
  int side = 0;
  int length = 0;
};

/// Named simulator presets: "single" (single-ball training worlds),
/// "multi" (200-frame worlds), "desk" (side 64, radius 6, speeds up to 2).
sim::SimConfig sim_preset(std::string_view name);

struct GenOptions {
  sim::SimConfig sim;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  io::BseqDtype dtype = io::BseqDtype::kU8;
};

/// Writes seq_NNNNN.bseq files plus manifest.txt into `out_dir`. Sequence i
/// is drawn from stream i of the run seed, so output does not depend on
/// generation order.
std::vector<ManifestEntry> generate_dataset(const GenOptions& options);

std::vector<ManifestEntry> read_manifest(const std::string& dir);

struct Dataset {
  std::vector<std::vector<BoundaryImage>> sequences;
  std::vector<ManifestEntry> entries;
};

/// Loads every manifest entry; `blind` strips the table border from all frames.
Dataset load_dataset(const std::string& dir, bool blind = false);
Dataset merge(std::vector<Dataset> parts);

// ------------------------------------------------------------------ training

struct TrainConfig {
  CmscConfig model = CmscConfig::desk();
  int epochs = 1;
  int batch = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  /// Stop after this many optimizer steps in total (0 = no limit).
  std::int64_t max_steps = 0;
  /// Use only the first k shuffled samples of each epoch (0 = all).
  std::int64_t samples_per_epoch = 0;
  /// Ramp the learning rate linearly over the first k steps of a run.
  std::int64_t warmup_steps = 0;
  /// Share of each epoch's samples drawn from cells where a ball is visible
  /// in the last input or the target (0 = plain shuffle of all cells).
  double ball_fraction = 0.0;
  /// Share of batch slots filled from the model's own short rollouts: the
  /// last 1..rollout_depth input frames are predictions, the target is the
  /// true next frame. Teaches the model to recover from its own output.
  double rollout_fraction = 0.0;
  int rollout_depth = 3;
  /// Rollout windows kept per refresh, and steps between refreshes.
  int rollout_pool = 32;
  int rollout_refresh = 250;
  std::string init_checkpoint;
  bool blind = false;

  /// Presets: "desk", "desk-nocontext", "full", "full-n6".
  static TrainConfig preset(std::string_view name);
  /// Overrides fields from a key=value config (model keys included).
  static TrainConfig from_kv(const KeyValues& kv, TrainConfig base);
  KeyValues to_kv() const;
  void validate() const;
};

struct TrainProgress {
  int epoch = 0;
  std::int64_t step = 0;
  double loss = 0.0;
};

struct EpochStats {
  int epoch = 0;
  std::int64_t steps = 0;
  double mean_loss = 0.0;
};

struct TrainResult {
  io::Checkpoint checkpoint;
  std::vector<EpochStats> epochs;
  std::int64_t steps = 0;
};

using ProgressFn = std::function<void(const TrainProgress&)>;

/// Seeded-shuffle minibatch ADAM on every (frame, grid cell) sample of
/// `data`. `warm_start`, when given, supplies the initial weights (the
/// optimizer always starts fresh).
TrainResult train(const TrainConfig& config, const Dataset& data,
                  const io::Checkpoint* warm_start = nullptr, const ProgressFn& progress = {},
                  const std::string& lineage = {});

std::string format_loss_log(std::span<const EpochStats> epochs);

// ------------------------------------------------------------------ rollout

struct RolloutStats {
  std::int64_t patch_predictions = 0;
};

/// Predicts the next full frame from the model's n most recent frames by
/// running every grid cell's context window through the model.
BoundaryImage predict_frame(const Model& model, std::span<const BoundaryImage* const> window,
                            RolloutStats* stats = nullptr);

/// Recursive prediction of `horizon` frames. Each step reads only frames up
/// to the previous step; predictions are clamped to [0,1] and fed back.
std::vector<BoundaryImage> rollout(const Model& model, std::span<const BoundaryImage> seed_frames,
                                   int horizon, RolloutStats* stats = nullptr);

/// `horizon` copies of the last seed frame.
std::vector<BoundaryImage> baseline_last_input(std::span<const BoundaryImage> seed_frames,
                                               int horizon);

// ------------------------------------------------------------------ evaluation

using Predictor =
    std::function<std::vector<BoundaryImage>(std::span<const BoundaryImage> seed, int horizon)>;

struct RolloutEvalOptions {
  int n_frames = 4;
  int horizon = 10;
  int start_stride = 1;
  int tol = 1;
  /// Outer pixel rings excluded from scoring (1 drops the table border).
  int ignore_border = 1;
  /// Feed ground truth instead of predictions between steps.
  bool teacher_forced = false;
  std::vector<double> thresholds = eval::default_thresholds();
};

struct RolloutEvalResult {
  std::vector<eval::PrCurve> per_step;  // index k-1 holds step t+k
  std::vector<double> mse;              // mean per-frame MSE per step
  std::size_t starts = 0;
};

/// Scores `predictor` from every start frame (every `start_stride`-th) of
/// every sequence with enough history and future, pooling counts per step.
RolloutEvalResult evaluate_rollouts(const Predictor& predictor, const Dataset& test,
                                    const RolloutEvalOptions& options);

Predictor model_predictor(const Model& model);
Predictor last_input_predictor();

struct PairEvalOptions {
  int tol = 1;
  int ignore_border = 0;
  /// Optional mask frames: one shared frame or one per step.
  std::vector<BoundaryImage> mask;
  /// Report AUC as well; ground truth is binarised at gt_threshold.
  bool confidence = false;
  double gt_threshold = 0.5;
  std::vector<double> thresholds = eval::default_thresholds();
};

/// Per-step metrics for aligned prediction / ground-truth sequences.
std::vector<eval::MetricRow> evaluate_pair(std::span<const BoundaryImage> pred,
                                           std::span<const BoundaryImage> gt,
                                           const PairEvalOptions& options);

/// One-step predictions of every grid cell (every `stride`-th frame) of
/// `data`, binned by distance from the patch border.
eval::ErrorProfile one_step_error_profile(const Model& model, const Dataset& data, int stride = 1);

// ------------------------------------------------------------------ gradcheck

struct GradCheckLine {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  std::size_t skipped = 0;      // coordinates whose stencil straddled a kink
  bool expect_failure = false;  // negative control
  bool passed = false;
};

/// Finite-difference checks of every differentiable op, one full level and a
/// two-level model, each over `seeds` random seeds, plus a deliberately
/// corrupted op that must fail.
std::vector<GradCheckLine> run_gradcheck_suite(int seeds = 10, double tolerance = 1e-4);

}  // namespace cmsc::pipeline
