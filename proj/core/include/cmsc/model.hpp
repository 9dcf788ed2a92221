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

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "cmsc/autodiff.hpp"
#include "cmsc/keyvalue.hpp"
#include "cmsc/rng.hpp"

namespace cmsc {

/// Architecture hyperparameters of a multi-scale context predictor.
///
/// Level 0 is the coarsest; level `n_levels - 1` runs at `context` pixels.
/// `context` is either 3 * patch (central patch plus its 8 neighbours) or
/// equal to `patch`, which gives the no-context ablation.
struct CmscConfig {
  int n_levels = 4;
  int patch = 32;
  int context = 96;
  int n_frames = 4;
  /// Widths of the five convolution pairs; the last pair ends in one channel.
  std::array<int, 5> filters{32, 64, 128, 64, 32};
  /// Supervise every level on a down-averaged target, not just the finest.
  bool deep_supervision = true;

  static CmscConfig full();
  static CmscConfig desk();

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  int level_scale(int level) const { return context >> (n_levels - 1 - level); }
  /// Side of the valid central window at a level, in that level's pixels.
  int level_crop(int level) const { return patch >> (n_levels - 1 - level); }

  KeyValues to_kv() const;
  /// Reads the keys written by to_kv(); absent keys keep `base` values.
  static CmscConfig from_kv(const KeyValues& kv, CmscConfig base);
  static CmscConfig from_kv(const KeyValues& kv);

  bool operator==(const CmscConfig&) const = default;
};

struct LevelSpec {
  int scale = 0;
  std::array<int, 5> filters{};
  int in_frames = 0;
  bool has_coarser_input = false;

  int in_channels() const { return in_frames + (has_coarser_input ? 1 : 0); }
};

std::vector<LevelSpec> level_specs(const CmscConfig& config);

/// Parameters of one model instance, in a fixed order (coarse level first,
/// layers c1..c10, weight before bias).
template <typename T>
struct BasicModel {
  CmscConfig config;
  std::vector<Parameter<T>> params;

  Parameter<T>& param(std::string_view name);
  const Parameter<T>& param(std::string_view name) const;
  std::size_t parameter_count() const;

  template <typename U>
  BasicModel<U> cast() const {
    BasicModel<U> out;
    out.config = config;
    for (const auto& p : params) out.params.emplace_back(p.name, p.value.template cast<U>());
    return out;
  }
};

using Model = BasicModel<float>;
using Model64 = BasicModel<double>;

/// Fan-in scaled uniform weights (He), zero biases.
Model build_model(const CmscConfig& config, SeededRng& rng);

/// Repeated 2x2 average pooling of N x n x context x context frames.
/// Returns one stack per level, coarsest first.
template <typename T>
std::vector<BasicTensor<T>> downsample_pyramid(const BasicTensor<T>& frames,
                                               const CmscConfig& config);

template <typename T>
struct ForwardPass {
  Var prediction;                 // N x 1 x patch x patch
  std::vector<Var> level_outputs;  // N x 1 x scale x scale, coarsest first
};

/// Coarse-to-fine forward pass. `frames` is N x n_frames x context x context.
/// With `trainable` the parameters are bound for backward(); otherwise they
/// enter the tape as constants.
template <typename T>
ForwardPass<T> forward(Tape<T>& tape, BasicModel<T>& model, Var frames, bool trainable);

/// Convenience inference call returning N x 1 x patch x patch.
Tensor predict(const Model& model, const Tensor& frames);

/// Sum of per-level MSE (deep supervision) or finest-level MSE only.
/// `target` is N x 1 x S x S with S equal to `context` or `patch`.
template <typename T>
Var training_loss(Tape<T>& tape, const ForwardPass<T>& pass, const BasicTensor<T>& target,
                  const CmscConfig& config);

struct Footprint {
  int y0 = 0, x0 = 0, y1 = -1, x1 = -1;  // inclusive, context coordinates
  int height() const { return y1 - y0 + 1; }
  int width() const { return x1 - x0 + 1; }
  bool empty() const { return y1 < y0; }
};

/// Bounding box of input pixels with nonzero gradient for one output pixel
/// of the central patch. The probe runs on a copy of the architecture with
/// every weight and bias set to `epsilon` and an all-ones input so that no
/// ReLU is inactive; max pooling is probed as average pooling so that the
/// footprint does not depend on tie-breaking.
Footprint receptive_field_probe(const CmscConfig& config, int patch_y, int patch_x,
                                double epsilon = 1e-3);
inline Footprint receptive_field_probe(const Model& model, int patch_y, int patch_x,
                                       double epsilon = 1e-3) {
  return receptive_field_probe(model.config, patch_y, patch_x, epsilon);
}

}  // namespace cmsc
