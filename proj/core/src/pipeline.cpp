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

#include "cmsc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmsc/adam.hpp"
#include "cmsc/patches.hpp"

namespace cmsc::pipeline {

namespace fs = std::filesystem;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kIo:
    case ErrorKind::kDecode:
      return kExitIo;
    case ErrorKind::kNumerical:
      return kExitNumerical;
    case ErrorKind::kShape:
    case ErrorKind::kConfig:
    case ErrorKind::kState:
      return kExitConfig;
  }
  return kExitFailure;
}

// ------------------------------------------------------------------ datasets

sim::SimConfig sim_preset(std::string_view name) {
  if (name == "single") return sim::SimConfig::single_ball();
  if (name == "multi") return sim::SimConfig::multi_ball(2);
  if (name == "desk") return sim::SimConfig::desk();
  throw ConfigError("unknown simulator preset '" + std::string(name) +
                    "' (expected single, multi or desk)");
}

std::vector<ManifestEntry> generate_dataset(const GenOptions& options) {
  options.sim.validate();
  if (options.count < 0) throw ConfigError("gen: count must be >= 0");
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw IoError("cannot create '" + options.out_dir + "': " + ec.message());

  const SeededRng root(options.seed);
  std::vector<ManifestEntry> entries;
  std::string manifest;
  for (int i = 0; i < options.count; ++i) {
    SeededRng rng = root.split(static_cast<std::uint64_t>(i));
    const std::uint64_t seq_seed = rng.seed();
    const sim::Sequence seq = sim::sample_sequence(options.sim, rng);
    char name[32];
    std::snprintf(name, sizeof name, "seq_%05d.bseq", i);
    io::save_bseq((fs::path(options.out_dir) / name).string(), seq.frames, options.dtype);
    ManifestEntry e{name, seq_seed, options.sim.n_balls, seq.worlds.front().side,
                    static_cast<int>(seq.frames.size())};
    KeyValues rec;
    rec.set("file", e.file);
    rec.set("seed", std::to_string(e.seed));
    rec.set("n_balls", e.n_balls);
    rec.set("side", e.side);
    rec.set("length", e.length);
    manifest += rec.to_record() + "\n";
    entries.push_back(std::move(e));
  }
  const std::string path = (fs::path(options.out_dir) / "manifest.txt").string();
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(manifest.data()),
                                 manifest.size()));
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.txt").string();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const KeyValues kv = KeyValues::parse_record(line);
    ManifestEntry e;
    e.file = kv.get("file");
    e.seed = std::stoull(kv.get_or("seed", "0"));
    e.n_balls = static_cast<int>(kv.get_int_or("n_balls", 0));
    e.side = static_cast<int>(kv.get_int_or("side", 0));
    e.length = static_cast<int>(kv.get_int_or("length", 0));
    out.push_back(std::move(e));
  }
  return out;
}

Dataset load_dataset(const std::string& dir, bool blind) {
  Dataset d;
  d.entries = read_manifest(dir);
  for (const auto& e : d.entries) {
    auto frames = io::load_bseq((fs::path(dir) / e.file).string());
    if (blind) {
      for (auto& f : frames) f = sim::strip_border(f);
    }
    d.sequences.push_back(std::move(frames));
  }
  return d;
}

Dataset merge(std::vector<Dataset> parts) {
  Dataset out;
  for (auto& p : parts) {
    for (auto& s : p.sequences) out.sequences.push_back(std::move(s));
    for (auto& e : p.entries) out.entries.push_back(std::move(e));
  }
  return out;
}

// ------------------------------------------------------------------ training

TrainConfig TrainConfig::preset(std::string_view name) {
  TrainConfig c;
  if (name == "desk") {
    c.model = CmscConfig::desk();
    c.epochs = 12;
    c.batch = 16;
    c.learning_rate = 1e-4;
    c.samples_per_epoch = 12000;
    c.warmup_steps = 300;
    c.ball_fraction = 0.5;
    c.rollout_fraction = 0.25;
  } else if (name == "desk-nocontext") {
    c = preset("desk");
    c.model.context = c.model.patch;
  } else if (name == "full" || name == "full-n6") {
    c.model = CmscConfig::full();
    if (name == "full-n6") c.model.n_frames = 6;
    c.epochs = 10;
    c.batch = 32;
  } else {
    throw ConfigError("unknown training preset '" + std::string(name) +
                      "' (expected desk, desk-nocontext, full or full-n6)");
  }
  return c;
}

TrainConfig TrainConfig::from_kv(const KeyValues& kv, TrainConfig base) {
  TrainConfig c = kv.has("preset") ? preset(kv.get("preset")) : std::move(base);
  c.model = CmscConfig::from_kv(kv, c.model);
  c.epochs = static_cast<int>(kv.get_int_or("epochs", c.epochs));
  c.batch = static_cast<int>(kv.get_int_or("batch", c.batch));
  c.learning_rate = kv.get_double_or("learning_rate", c.learning_rate);
  c.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", static_cast<long long>(c.seed)));
  c.max_steps = kv.get_int_or("max_steps", c.max_steps);
  c.samples_per_epoch = kv.get_int_or("samples_per_epoch", c.samples_per_epoch);
  c.warmup_steps = kv.get_int_or("warmup_steps", c.warmup_steps);
  c.ball_fraction = kv.get_double_or("ball_fraction", c.ball_fraction);
  c.rollout_fraction = kv.get_double_or("rollout_fraction", c.rollout_fraction);
  c.rollout_depth = static_cast<int>(kv.get_int_or("rollout_depth", c.rollout_depth));
  c.rollout_pool = static_cast<int>(kv.get_int_or("rollout_pool", c.rollout_pool));
  c.rollout_refresh = static_cast<int>(kv.get_int_or("rollout_refresh", c.rollout_refresh));
  c.init_checkpoint = kv.get_or("init", c.init_checkpoint);
  c.blind = kv.get_bool_or("blind", c.blind);
  return c;
}

KeyValues TrainConfig::to_kv() const {
  KeyValues kv = model.to_kv();
  kv.set("epochs", epochs);
  kv.set("batch", batch);
  kv.set("learning_rate", learning_rate);
  kv.set("seed", std::to_string(seed));
  kv.set("max_steps", static_cast<long long>(max_steps));
  kv.set("samples_per_epoch", static_cast<long long>(samples_per_epoch));
  kv.set("warmup_steps", static_cast<long long>(warmup_steps));
  kv.set("ball_fraction", ball_fraction);
  kv.set("rollout_fraction", rollout_fraction);
  kv.set("rollout_depth", rollout_depth);
  kv.set("rollout_pool", rollout_pool);
  kv.set("rollout_refresh", rollout_refresh);
  if (!init_checkpoint.empty()) kv.set("init", init_checkpoint);
  kv.set_bool("blind", blind);
  return kv;
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch < 1) throw ConfigError("train: batch must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (max_steps < 0 || samples_per_epoch < 0 || warmup_steps < 0) {
    throw ConfigError("train: max_steps, samples_per_epoch and warmup_steps must be >= 0");
  }
  if (!(ball_fraction >= 0.0 && ball_fraction <= 1.0) ||
      !(rollout_fraction >= 0.0 && rollout_fraction <= 1.0)) {
    throw ConfigError("train: ball_fraction and rollout_fraction must lie in [0, 1]");
  }
  if (rollout_depth < 1 || rollout_pool < 1 || rollout_refresh < 1) {
    throw ConfigError("train: rollout_depth, rollout_pool and rollout_refresh must be >= 1");
  }
}

namespace {

struct SampleRef {
  std::uint32_t sequence;
  std::uint32_t frame;  // last input frame
  std::uint16_t row;
  std::uint16_t col;
};

// True when a cell shows boundary pixels other than the outermost image
// ring, which holds the table border.
bool cell_has_ball(const BoundaryImage& frame, int row, int col, int patch) {
  const int h = frame.height(), w = frame.width();
  for (int y = row * patch; y < (row + 1) * patch; ++y) {
    if (y == 0 || y == h - 1) continue;
    const float* line = frame.pixels().data() + static_cast<std::size_t>(y) * w;
    for (int x = std::max(1, col * patch); x < std::min(w - 1, (col + 1) * patch); ++x) {
      if (line[x] != 0.0f) return true;
    }
  }
  return false;
}

struct SamplePools {
  std::vector<SampleRef> all;
  std::vector<SampleRef> ball;
  std::vector<SampleRef> empty;
};

SamplePools enumerate_samples(const Dataset& data, const io::PatchGeometry& geo) {
  SamplePools pools;
  for (std::size_t s = 0; s < data.sequences.size(); ++s) {
    const auto& seq = data.sequences[s];
    if (static_cast<int>(seq.size()) < geo.n_frames + 1) continue;
    io::check_tiling(seq.front(), geo.patch);
    const int rows = seq.front().height() / geo.patch, cols = seq.front().width() / geo.patch;
    for (int t = geo.n_frames - 1; t + 1 < static_cast<int>(seq.size()); ++t) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const SampleRef ref{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t),
                              static_cast<std::uint16_t>(r), static_cast<std::uint16_t>(c)};
          pools.all.push_back(ref);
          const bool ball = cell_has_ball(seq[static_cast<std::size_t>(t)], r, c, geo.patch) ||
                            cell_has_ball(seq[static_cast<std::size_t>(t) + 1], r, c, geo.patch);
          (ball ? pools.ball : pools.empty).push_back(ref);
        }
      }
    }
  }
  return pools;
}

// One epoch's sample order: a seeded shuffle, or a seeded draw that puts a
// fixed share of ball cells into the epoch.
std::vector<SampleRef> epoch_order(const SamplePools& pools, const TrainConfig& config,
                                   SeededRng& rng) {
  const bool mix = config.ball_fraction > 0.0 && !pools.ball.empty() && !pools.empty.empty();
  if (!mix) {
    std::vector<SampleRef> order = pools.all;
    rng.shuffle(order.begin(), order.end());
    if (config.samples_per_epoch > 0 &&
        order.size() > static_cast<std::size_t>(config.samples_per_epoch)) {
      order.resize(static_cast<std::size_t>(config.samples_per_epoch));
    }
    return order;
  }
  const std::size_t n = config.samples_per_epoch > 0
                            ? static_cast<std::size_t>(config.samples_per_epoch)
                            : pools.all.size();
  std::vector<SampleRef> order;
  order.reserve(n);
  auto pick = [&rng](const std::vector<SampleRef>& v) {
    return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
  };
  for (std::size_t i = 0; i < n; ++i) {
    order.push_back(rng.uniform01() < config.ball_fraction ? pick(pools.ball) : pick(pools.empty));
  }
  return order;
}

// Input windows whose newest frames come from the model's own rollout.
struct RolloutWindow {
  std::vector<BoundaryImage> frames;  // n_frames, oldest first
  const BoundaryImage* target = nullptr;
  std::vector<std::pair<int, int>> cells;  // cells showing a ball
};

std::vector<RolloutWindow> make_rollout_pool(const Model& model, const Dataset& data,
                                             const TrainConfig& config, SeededRng& rng) {
  const CmscConfig& mc = model.config;
  std::vector<RolloutWindow> pool;
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < data.sequences.size(); ++s) {
    if (static_cast<int>(data.sequences[s].size()) >= mc.n_frames + config.rollout_depth + 1) {
      usable.push_back(s);
    }
  }
  if (usable.empty()) return pool;
  for (int attempt = 0; attempt < 8 * config.rollout_pool &&
                        static_cast<int>(pool.size()) < config.rollout_pool;
       ++attempt) {
    const auto& seq = data.sequences[usable[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(usable.size()) - 1))]];
    const int depth = static_cast<int>(rng.uniform_int(1, config.rollout_depth));
    const int len = static_cast<int>(seq.size());
    // t is the last input frame; frames t-depth+1..t get replaced.
    const int t = static_cast<int>(rng.uniform_int(mc.n_frames - 1 + depth, len - 2));
    const auto seed = std::span(seq).subspan(static_cast<std::size_t>(t - depth - mc.n_frames + 1),
                                             static_cast<std::size_t>(mc.n_frames));
    std::vector<BoundaryImage> predicted = rollout(model, seed, depth);
    RolloutWindow w;
    for (int k = mc.n_frames - 1; k >= 0; --k) {
      const int idx = t - k;
      w.frames.push_back(idx > t - depth
                             ? std::move(predicted[static_cast<std::size_t>(idx - (t - depth) - 1)])
                             : seq[static_cast<std::size_t>(idx)]);
    }
    w.target = &seq[static_cast<std::size_t>(t) + 1];
    const int rows = w.target->height() / mc.patch, cols = w.target->width() / mc.patch;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (cell_has_ball(*w.target, r, c, mc.patch) ||
            cell_has_ball(seq[static_cast<std::size_t>(t)], r, c, mc.patch)) {
          w.cells.emplace_back(r, c);
        }
      }
    }
    if (!w.cells.empty()) pool.push_back(std::move(w));
  }
  return pool;
}

// Stream ids for the run's sub-generators; 1..epochs shuffle the epochs.
constexpr std::uint64_t kRolloutStream = 1ull << 32;
constexpr std::uint64_t kMixStream = (1ull << 32) + 1;

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& data,
                  const io::Checkpoint* warm_start, const ProgressFn& progress,
                  const std::string& lineage) {
  config.validate();
  const CmscConfig& mc = config.model;
  SeededRng rng(config.seed);
  SeededRng init_rng = rng.split(0);
  TrainResult result;
  result.checkpoint.model = build_model(mc, init_rng);
  if (warm_start) {
    io::load_weights(result.checkpoint.model, warm_start->model);
    result.checkpoint.step = warm_start->step;
  }
  result.checkpoint.lineage = lineage;
  Model& model = result.checkpoint.model;

  const io::PatchGeometry geo{mc.patch, mc.context, mc.n_frames};
  const SamplePools pools = enumerate_samples(data, geo);
  if (pools.all.empty() && config.epochs > 0) {
    throw ConfigError("train: dataset yields no samples (sequences shorter than n_frames + 1)");
  }

  AdamState<float> adam(model.params, AdamOptions{config.learning_rate});
  const std::size_t ctx_elems = static_cast<std::size_t>(mc.n_frames) * mc.context * mc.context;
  const std::size_t tgt_elems = static_cast<std::size_t>(mc.patch) * mc.patch;
  std::vector<const BoundaryImage*> window(static_cast<std::size_t>(mc.n_frames));
  SeededRng rollout_rng = rng.split(kRolloutStream);
  SeededRng mix_rng = rng.split(kMixStream);
  std::vector<RolloutWindow> rollout_pool;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.max_steps > 0 && result.steps >= config.max_steps) break;
    SeededRng epoch_rng = rng.split(static_cast<std::uint64_t>(epoch));
    const std::vector<SampleRef> order = epoch_order(pools, config, epoch_rng);
    EpochStats stats{epoch, 0, 0.0};
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch)) {
      if (config.max_steps > 0 && result.steps >= config.max_steps) break;
      // Rollout windows need a model past its warm-up to be informative.
      if (config.rollout_fraction > 0.0 && result.steps >= config.warmup_steps &&
          (rollout_pool.empty() || result.steps % config.rollout_refresh == 0)) {
        rollout_pool = make_rollout_pool(model, data, config, rollout_rng);
      }
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch));
      const int n = static_cast<int>(end - begin);
      Tensor frames(Shape{n, mc.n_frames, mc.context, mc.context});
      Tensor target(Shape{n, 1, mc.patch, mc.patch});
      for (int i = 0; i < n; ++i) {
        float* ctx_dst = frames.ptr() + static_cast<std::size_t>(i) * ctx_elems;
        float* tgt_dst = target.ptr() + static_cast<std::size_t>(i) * tgt_elems;
        if (!rollout_pool.empty() && mix_rng.uniform01() < config.rollout_fraction) {
          const RolloutWindow& w = rollout_pool[static_cast<std::size_t>(
              mix_rng.uniform_int(0, static_cast<std::int64_t>(rollout_pool.size()) - 1))];
          const auto [r, c] = w.cells[static_cast<std::size_t>(
              mix_rng.uniform_int(0, static_cast<std::int64_t>(w.cells.size()) - 1))];
          for (int k = 0; k < mc.n_frames; ++k) window[static_cast<std::size_t>(k)] = &w.frames[static_cast<std::size_t>(k)];
          io::fill_context(window, r, c, geo, ctx_dst);
          io::fill_patch(*w.target, r, c, mc.patch, tgt_dst);
          continue;
        }
        const SampleRef& ref = order[begin + static_cast<std::size_t>(i)];
        const auto& seq = data.sequences[ref.sequence];
        for (int k = 0; k < mc.n_frames; ++k) {
          window[static_cast<std::size_t>(k)] = &seq[ref.frame - static_cast<std::uint32_t>(mc.n_frames - 1 - k)];
        }
        io::fill_context(window, ref.row, ref.col, geo, ctx_dst);
        io::fill_patch(seq[ref.frame + 1], ref.row, ref.col, mc.patch, tgt_dst);
      }
      for (auto& p : model.params) p.zero_grad();
      Tape<float> tape;
      Var in = tape.constant(std::move(frames));
      const ForwardPass<float> pass = forward(tape, model, in, true);
      Var loss = training_loss(tape, pass, target, mc);
      const double value = tape.value(loss)[0];
      if (!std::isfinite(value)) {
        throw NumericalError("train: non-finite loss at step " + std::to_string(result.steps + 1) +
                             " (epoch " + std::to_string(epoch) + ")");
      }
      tape.backward(loss);
      if (result.steps < config.warmup_steps) {
        adam.set_learning_rate(config.learning_rate * static_cast<double>(result.steps + 1) /
                               static_cast<double>(config.warmup_steps));
      } else {
        adam.set_learning_rate(config.learning_rate);
      }
      adam.step(model.params);
      ++result.steps;
      ++result.checkpoint.step;
      ++stats.steps;
      stats.mean_loss += value;
      if (progress) progress(TrainProgress{epoch, result.steps, value});
    }
    if (stats.steps > 0) stats.mean_loss /= static_cast<double>(stats.steps);
    result.epochs.push_back(stats);
  }
  for (const auto& p : model.params) {
    if (!p.value.all_finite()) {
      throw NumericalError("train: parameter '" + p.name + "' became non-finite");
    }
  }
  return result;
}

std::string format_loss_log(std::span<const EpochStats> epochs) {
  std::string out;
  char buf[96];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "epoch=%d steps=%lld mean_loss=%.9g\n", e.epoch,
                  static_cast<long long>(e.steps), e.mean_loss);
    out += buf;
  }
  return out;
}

// ------------------------------------------------------------------ rollout

namespace {

// Cells per forward call; bounds peak activation memory.
constexpr int kCellsPerChunk = 16;

}  // namespace

BoundaryImage predict_frame(const Model& model, std::span<const BoundaryImage* const> window,
                            RolloutStats* stats) {
  const CmscConfig& mc = model.config;
  if (static_cast<int>(window.size()) != mc.n_frames) {
    throw ShapeError("predict_frame: model expects " + std::to_string(mc.n_frames) +
                     " frames, got " + std::to_string(window.size()));
  }
  const BoundaryImage& last = *window.back();
  for (const BoundaryImage* f : window) {
    if (!f->same_size(last)) throw ShapeError("predict_frame: frames differ in size");
  }
  io::check_tiling(last, mc.patch);
  const io::PatchGeometry geo{mc.patch, mc.context, mc.n_frames};
  const int rows = last.height() / mc.patch, cols = last.width() / mc.patch;
  const int cells = rows * cols;
  const std::size_t ctx_elems = static_cast<std::size_t>(mc.n_frames) * mc.context * mc.context;
  BoundaryImage out(last.height(), last.width());
  for (int first = 0; first < cells; first += kCellsPerChunk) {
    const int n = std::min(kCellsPerChunk, cells - first);
    Tensor batch(Shape{n, mc.n_frames, mc.context, mc.context});
    for (int i = 0; i < n; ++i) {
      const int cell = first + i;
      io::fill_context(window, cell / cols, cell % cols, geo, batch.ptr() + i * ctx_elems);
    }
    const Tensor pred = predict(model, batch);
    for (int i = 0; i < n; ++i) {
      const int cell = first + i;
      const int oy = (cell / cols) * mc.patch, ox = (cell % cols) * mc.patch;
      for (int y = 0; y < mc.patch; ++y) {
        for (int x = 0; x < mc.patch; ++x) {
          const float v = pred.at(i, 0, y, x);
          out.at(oy + y, ox + x) = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
        }
      }
    }
    if (stats) stats->patch_predictions += n;
  }
  return out;
}

std::vector<BoundaryImage> rollout(const Model& model, std::span<const BoundaryImage> seed_frames,
                                   int horizon, RolloutStats* stats) {
  const int n = model.config.n_frames;
  if (horizon < 1) throw ConfigError("rollout: horizon must be >= 1");
  if (static_cast<int>(seed_frames.size()) < n) {
    throw ConfigError("rollout: need at least " + std::to_string(n) + " seed frames, got " +
                      std::to_string(seed_frames.size()));
  }
  std::vector<BoundaryImage> history(seed_frames.end() - n, seed_frames.end());
  std::vector<BoundaryImage> out;
  out.reserve(static_cast<std::size_t>(horizon));
  std::vector<const BoundaryImage*> window(static_cast<std::size_t>(n));
  for (int t = 0; t < horizon; ++t) {
    for (int k = 0; k < n; ++k) {
      window[static_cast<std::size_t>(k)] = &history[history.size() - static_cast<std::size_t>(n - k)];
    }
    BoundaryImage next = predict_frame(model, window, stats);
    // The whole frame is complete before it becomes visible to the next step.
    out.push_back(next);
    history.push_back(std::move(next));
  }
  return out;
}

std::vector<BoundaryImage> baseline_last_input(std::span<const BoundaryImage> seed_frames,
                                               int horizon) {
  if (seed_frames.empty()) throw ConfigError("baseline: no seed frames");
  if (horizon < 1) throw ConfigError("baseline: horizon must be >= 1");
  return std::vector<BoundaryImage>(static_cast<std::size_t>(horizon), seed_frames.back());
}

// ------------------------------------------------------------------ evaluation

Predictor model_predictor(const Model& model) {
  return [&model](std::span<const BoundaryImage> seed, int horizon) {
    return rollout(model, seed, horizon);
  };
}

Predictor last_input_predictor() {
  return [](std::span<const BoundaryImage> seed, int horizon) {
    return baseline_last_input(seed, horizon);
  };
}

RolloutEvalResult evaluate_rollouts(const Predictor& predictor, const Dataset& test,
                                    const RolloutEvalOptions& options) {
  if (options.horizon < 1 || options.start_stride < 1 || options.n_frames < 1) {
    throw ConfigError("evaluate_rollouts: horizon, stride and n_frames must be >= 1");
  }
  std::vector<eval::PrAccumulator> acc(static_cast<std::size_t>(options.horizon),
                                       eval::PrAccumulator(options.thresholds, options.tol));
  RolloutEvalResult result;
  result.mse.assign(static_cast<std::size_t>(options.horizon), 0.0);
  const int n = options.n_frames;
  for (const auto& seq : test.sequences) {
    const int len = static_cast<int>(seq.size());
    if (len == 0) continue;
    const BoundaryImage mask =
        eval::interior_mask(seq.front().height(), seq.front().width(), options.ignore_border);
    for (int t0 = n - 1; t0 + options.horizon < len; t0 += options.start_stride) {
      const auto seed = std::span(seq).subspan(static_cast<std::size_t>(t0 - n + 1),
                                               static_cast<std::size_t>(n));
      std::vector<BoundaryImage> preds;
      if (options.teacher_forced) {
        for (int k = 1; k <= options.horizon; ++k) {
          const auto gt_window = std::span(seq).subspan(static_cast<std::size_t>(t0 + k - n),
                                                        static_cast<std::size_t>(n));
          preds.push_back(predictor(gt_window, 1).at(0));
        }
      } else {
        preds = predictor(seed, options.horizon);
      }
      if (static_cast<int>(preds.size()) != options.horizon) {
        throw ShapeError("evaluate_rollouts: predictor returned " + std::to_string(preds.size()) +
                         " frames, expected " + std::to_string(options.horizon));
      }
      for (int k = 1; k <= options.horizon; ++k) {
        const BoundaryImage& gt = seq[static_cast<std::size_t>(t0 + k)];
        acc[static_cast<std::size_t>(k - 1)].add(preds[static_cast<std::size_t>(k - 1)], gt, &mask);
        result.mse[static_cast<std::size_t>(k - 1)] +=
            eval::mse_metric(preds[static_cast<std::size_t>(k - 1)], gt);
      }
      ++result.starts;
    }
  }
  for (std::size_t k = 0; k < acc.size(); ++k) {
    result.per_step.push_back(acc[k].curve());
    if (result.starts) result.mse[k] /= static_cast<double>(result.starts);
  }
  return result;
}

std::vector<eval::MetricRow> evaluate_pair(std::span<const BoundaryImage> pred,
                                           std::span<const BoundaryImage> gt,
                                           const PairEvalOptions& options) {
  if (pred.size() != gt.size()) {
    throw ShapeError("eval: prediction has " + std::to_string(pred.size()) +
                     " frames but ground truth has " + std::to_string(gt.size()));
  }
  if (!options.mask.empty() && options.mask.size() != 1 && options.mask.size() != pred.size()) {
    throw ShapeError("eval: mask must hold one frame or one per step");
  }
  std::vector<eval::MetricRow> rows;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    BoundaryImage mask = eval::interior_mask(gt[k].height(), gt[k].width(), options.ignore_border);
    if (!options.mask.empty()) {
      const BoundaryImage& m = options.mask.size() == 1 ? options.mask[0] : options.mask[k];
      if (!m.same_size(mask)) throw ShapeError("eval: mask size differs from frames");
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.pixels()[i] = (mask.pixels()[i] != 0.0f && m.pixels()[i] != 0.0f) ? 1.0f : 0.0f;
      }
    }
    const BoundaryImage gt_bin = eval::binarize(gt[k], options.gt_threshold);
    const eval::PrCurve curve =
        eval::pr_curve(pred[k], gt_bin, options.thresholds, options.tol, &mask);
    const int step = static_cast<int>(k) + 1;
    rows.push_back({step, "best_f", curve.best_f});
    rows.push_back({step, "best_threshold", curve.best_threshold});
    if (options.confidence) rows.push_back({step, "auc", curve.auc});
    rows.push_back({step, "mse", eval::mse_metric(pred[k], gt[k])});
  }
  return rows;
}

eval::ErrorProfile one_step_error_profile(const Model& model, const Dataset& data, int stride) {
  const CmscConfig& mc = model.config;
  if (stride < 1) throw ConfigError("error profile: stride must be >= 1");
  std::vector<BoundaryImage> preds, gts;
  std::vector<const BoundaryImage*> window(static_cast<std::size_t>(mc.n_frames));
  for (const auto& seq : data.sequences) {
    for (int t = mc.n_frames - 1; t + 1 < static_cast<int>(seq.size()); t += stride) {
      for (int k = 0; k < mc.n_frames; ++k) {
        window[static_cast<std::size_t>(k)] = &seq[static_cast<std::size_t>(t - mc.n_frames + 1 + k)];
      }
      const BoundaryImage next = predict_frame(model, window);
      const BoundaryImage& gt = seq[static_cast<std::size_t>(t) + 1];
      for (int r = 0; r < gt.height() / mc.patch; ++r) {
        for (int c = 0; c < gt.width() / mc.patch; ++c) {
          BoundaryImage p(mc.patch, mc.patch), g(mc.patch, mc.patch);
          io::fill_patch(next, r, c, mc.patch, p.pixels().data());
          io::fill_patch(gt, r, c, mc.patch, g.pixels().data());
          preds.push_back(std::move(p));
          gts.push_back(std::move(g));
        }
      }
    }
  }
  return eval::error_vs_border_distance(preds, gts, mc.patch);
}

}  // namespace cmsc::pipeline
