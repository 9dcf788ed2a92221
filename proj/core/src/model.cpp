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

#include "cmsc/model.hpp"

#include <cmath>

namespace cmsc {

CmscConfig CmscConfig::full() { return CmscConfig{}; }

CmscConfig CmscConfig::desk() {
  CmscConfig c;
  c.n_levels = 3;
  c.patch = 16;
  c.context = 48;
  c.n_frames = 4;
  c.filters = {16, 32, 64, 32, 16};
  return c;
}

void CmscConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (n_levels < 1 || n_levels > 8) fail("n_levels must be in [1, 8]");
  if (n_frames < 1) fail("n_frames must be >= 1");
  if (patch < 1) fail("patch must be >= 1");
  for (int f : filters) {
    if (f < 1) fail("filter widths must be >= 1");
  }
  if (context != 3 * patch && context != patch) {
    fail("context (" + std::to_string(context) + ") must equal 3 * patch or patch");
  }
  const int shrink = 1 << (n_levels - 1);
  if (context % shrink || patch % shrink) {
    fail("context and patch must be divisible by 2^(n_levels-1) = " + std::to_string(shrink));
  }
  for (int l = 0; l < n_levels; ++l) {
    if (level_scale(l) % 4) {
      fail("level scale " + std::to_string(level_scale(l)) + " is not divisible by 4");
    }
  }
}

KeyValues CmscConfig::to_kv() const {
  KeyValues kv;
  kv.set("n_levels", n_levels);
  kv.set("patch", patch);
  kv.set("context", context);
  kv.set("n_frames", n_frames);
  std::string f;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    if (i) f += ',';
    f += std::to_string(filters[i]);
  }
  kv.set("filters", f);
  kv.set_bool("deep_supervision", deep_supervision);
  return kv;
}

CmscConfig CmscConfig::from_kv(const KeyValues& kv, CmscConfig base) {
  CmscConfig c = base;
  c.n_levels = static_cast<int>(kv.get_int_or("n_levels", c.n_levels));
  c.patch = static_cast<int>(kv.get_int_or("patch", c.patch));
  c.context = static_cast<int>(kv.get_int_or("context", c.context));
  c.n_frames = static_cast<int>(kv.get_int_or("n_frames", c.n_frames));
  if (kv.has("filters")) {
    const auto f = kv.get_int_list("filters");
    if (f.size() != c.filters.size()) {
      throw ConfigError("model config: filters needs 5 comma-separated widths");
    }
    std::copy(f.begin(), f.end(), c.filters.begin());
  }
  c.deep_supervision = kv.get_bool_or("deep_supervision", c.deep_supervision);
  return c;
}

CmscConfig CmscConfig::from_kv(const KeyValues& kv) { return from_kv(kv, CmscConfig{}); }

std::vector<LevelSpec> level_specs(const CmscConfig& config) {
  config.validate();
  std::vector<LevelSpec> out;
  for (int l = 0; l < config.n_levels; ++l) {
    out.push_back(LevelSpec{config.level_scale(l), config.filters, config.n_frames, l > 0});
  }
  return out;
}

namespace {

// (in, out) channel pairs of the ten convolutions of one level.
std::array<std::pair<int, int>, 10> layer_channels(const LevelSpec& spec) {
  const auto& f = spec.filters;
  return {{{spec.in_channels(), f[0]},
           {f[0], f[0]},
           {f[0], f[1]},
           {f[1], f[1]},
           {f[1], f[2]},
           {f[2], f[2]},
           {f[2], f[3]},
           {f[3], f[3]},
           {f[3], f[4]},
           {f[4], 1}}};
}

std::string layer_name(int scale, int layer, const char* what) {
  return "L" + std::to_string(scale) + ".c" + std::to_string(layer + 1) + "." + what;
}

}  // namespace

template <typename T>
Parameter<T>& BasicModel<T>::param(std::string_view name) {
  for (auto& p : params) {
    if (p.name == name) return p;
  }
  throw ConfigError("model has no parameter '" + std::string(name) + "'");
}

template <typename T>
const Parameter<T>& BasicModel<T>::param(std::string_view name) const {
  return const_cast<BasicModel*>(this)->param(name);
}

template <typename T>
std::size_t BasicModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

Model build_model(const CmscConfig& config, SeededRng& rng) {
  Model model;
  model.config = config;
  for (const LevelSpec& spec : level_specs(config)) {
    const auto channels = layer_channels(spec);
    for (int l = 0; l < 10; ++l) {
      const auto [cin, cout] = channels[static_cast<std::size_t>(l)];
      Tensor w(Shape{cout, cin, 3, 3});
      const double bound = std::sqrt(6.0 / (cin * 9));
      for (float& v : w.data()) v = static_cast<float>(rng.uniform(-bound, bound));
      model.params.emplace_back(layer_name(spec.scale, l, "weight"), std::move(w));
      model.params.emplace_back(layer_name(spec.scale, l, "bias"), Tensor(Shape{cout}));
    }
  }
  return model;
}

template <typename T>
std::vector<BasicTensor<T>> downsample_pyramid(const BasicTensor<T>& frames,
                                               const CmscConfig& config) {
  if (frames.rank() != 4 || frames.dim(2) != frames.dim(3) ||
      frames.dim(2) != config.context || frames.dim(1) != config.n_frames) {
    throw ShapeError("downsample_pyramid: expected N x " + std::to_string(config.n_frames) +
                     " x " + std::to_string(config.context) + " x " +
                     std::to_string(config.context) + ", got " + shape_string(frames.shape()));
  }
  std::vector<BasicTensor<T>> out(static_cast<std::size_t>(config.n_levels));
  out.back() = frames;
  for (int l = config.n_levels - 2; l >= 0; --l) {
    out[static_cast<std::size_t>(l)] = kernels::avgpool2(out[static_cast<std::size_t>(l) + 1]);
  }
  return out;
}

namespace {

template <typename T>
ForwardPass<T> forward_impl(Tape<T>& tape, BasicModel<T>& model, Var frames, bool trainable,
                            bool average_pools) {
  const CmscConfig& cfg = model.config;
  const BasicTensor<T>& x = tape.value(frames);
  if (x.rank() != 4 || x.dim(1) != cfg.n_frames) {
    throw ShapeError("forward: expected " + std::to_string(cfg.n_frames) +
                     " input frames as N x n x H x W, got " + shape_string(x.shape()));
  }
  if (x.dim(2) != cfg.context || x.dim(3) != cfg.context) {
    throw ShapeError("forward: frames must be " + std::to_string(cfg.context) + " x " +
                     std::to_string(cfg.context) + ", got " + shape_string(x.shape()));
  }
  if (model.params.size() != static_cast<std::size_t>(cfg.n_levels) * 20) {
    throw ShapeError("forward: model holds " + std::to_string(model.params.size()) +
                     " parameters, config needs " + std::to_string(cfg.n_levels * 20));
  }

  // Finest stack first, then successively pooled copies.
  std::vector<Var> stacks(static_cast<std::size_t>(cfg.n_levels));
  stacks.back() = frames;
  for (int l = cfg.n_levels - 2; l >= 0; --l) {
    stacks[static_cast<std::size_t>(l)] = ops::avgpool2(tape, stacks[static_cast<std::size_t>(l) + 1]);
  }

  auto bind = [&](std::size_t idx) {
    Parameter<T>& p = model.params[idx];
    return trainable ? tape.parameter(p) : tape.constant(p.value);
  };

  ForwardPass<T> pass;
  Var coarser;
  std::size_t idx = 0;
  for (int l = 0; l < cfg.n_levels; ++l) {
    Var h = stacks[static_cast<std::size_t>(l)];
    if (l > 0) h = ops::concat_channels(tape, h, ops::upsample2(tape, coarser));
    for (int layer = 0; layer < 10; ++layer) {
      Var w = bind(idx++);
      Var b = bind(idx++);
      h = ops::conv2d_same(tape, h, w, b);
      if (layer == 9) {
        h = ops::bounded_out(tape, h);
      } else {
        h = ops::relu(tape, h);
      }
      if (layer == 1 || layer == 3) {
        h = average_pools ? ops::avgpool2(tape, h) : ops::maxpool2(tape, h);
      }
      if (layer == 5 || layer == 7) h = ops::upsample2(tape, h);
    }
    pass.level_outputs.push_back(h);
    coarser = h;
  }
  pass.prediction = ops::crop_center(tape, coarser, cfg.patch);
  return pass;
}

}  // namespace

template <typename T>
ForwardPass<T> forward(Tape<T>& tape, BasicModel<T>& model, Var frames, bool trainable) {
  return forward_impl(tape, model, frames, trainable, false);
}

Tensor predict(const Model& model, const Tensor& frames) {
  Tape<float> tape;
  Var in = tape.constant(frames);
  auto pass = forward(tape, const_cast<Model&>(model), in, false);
  return tape.value(pass.prediction);
}

template <typename T>
Var training_loss(Tape<T>& tape, const ForwardPass<T>& pass, const BasicTensor<T>& target,
                  const CmscConfig& cfg) {
  if (target.rank() != 4 || target.dim(1) != 1 || target.dim(2) != target.dim(3) ||
      (target.dim(2) != cfg.context && target.dim(2) != cfg.patch)) {
    throw ShapeError("training_loss: target must be N x 1 x S x S with S = context or patch, got " +
                     shape_string(target.shape()));
  }
  // Reduce the target to its central patch, then down-average per level.
  BasicTensor<T> patch_target = target;
  if (target.dim(2) != cfg.patch) {
    Tape<T> scratch;
    patch_target = scratch.value(ops::crop_center(scratch, scratch.constant(target), cfg.patch));
  }
  std::vector<BasicTensor<T>> targets(static_cast<std::size_t>(cfg.n_levels));
  targets.back() = std::move(patch_target);
  for (int l = cfg.n_levels - 2; l >= 0; --l) {
    targets[static_cast<std::size_t>(l)] = kernels::avgpool2(targets[static_cast<std::size_t>(l) + 1]);
  }
  Var total;
  const int first = cfg.deep_supervision ? 0 : cfg.n_levels - 1;
  for (int l = first; l < cfg.n_levels; ++l) {
    Var out = ops::crop_center(tape, pass.level_outputs.at(static_cast<std::size_t>(l)),
                               cfg.level_crop(l));
    Var loss = ops::mse_loss(tape, out, tape.constant(targets[static_cast<std::size_t>(l)]));
    total = total.valid() ? ops::add(tape, total, loss) : loss;
  }
  return total;
}

Footprint receptive_field_probe(const CmscConfig& config, int patch_y, int patch_x,
                                double epsilon) {
  config.validate();
  if (patch_y < 0 || patch_x < 0 || patch_y >= config.patch || patch_x >= config.patch) {
    throw ShapeError("receptive_field_probe: pixel (" + std::to_string(patch_y) + ", " +
                     std::to_string(patch_x) + ") lies outside the central patch");
  }
  SeededRng rng(0);
  Model64 model = build_model(config, rng).cast<double>();
  for (auto& p : model.params) p.value.fill(epsilon);

  Tape<double> tape;
  Var in = tape.input(Tensor64(Shape{1, config.n_frames, config.context, config.context}, 1.0));
  // Max pooling routes gradient to one element per window, and on a flat
  // input that element is decided by tie-breaking. Average pooling has the
  // same window geometry and reaches every element.
  auto pass = forward_impl(tape, model, in, false, true);
  Var pixel = ops::select(tape, pass.prediction,
                          static_cast<std::size_t>(patch_y) * config.patch + patch_x);
  tape.backward(pixel);
  const Tensor64& g = tape.grad(in);

  Footprint fp{config.context, config.context, -1, -1};
  for (int c = 0; c < config.n_frames; ++c) {
    for (int y = 0; y < config.context; ++y) {
      for (int x = 0; x < config.context; ++x) {
        if (g.at(0, c, y, x) == 0.0) continue;
        fp.y0 = std::min(fp.y0, y);
        fp.x0 = std::min(fp.x0, x);
        fp.y1 = std::max(fp.y1, y);
        fp.x1 = std::max(fp.x1, x);
      }
    }
  }
  if (fp.empty()) fp = Footprint{};
  return fp;
}

template struct BasicModel<float>;
template struct BasicModel<double>;
template std::vector<Tensor> downsample_pyramid(const Tensor&, const CmscConfig&);
template std::vector<Tensor64> downsample_pyramid(const Tensor64&, const CmscConfig&);
template ForwardPass<float> forward(Tape<float>&, Model&, Var, bool);
template ForwardPass<double> forward(Tape<double>&, Model64&, Var, bool);
template Var training_loss(Tape<float>&, const ForwardPass<float>&, const Tensor&,
                           const CmscConfig&);
template Var training_loss(Tape<double>&, const ForwardPass<double>&, const Tensor64&,
                           const CmscConfig&);

}  // namespace cmsc
