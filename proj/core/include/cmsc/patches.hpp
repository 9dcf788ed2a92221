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

#include <span>
#include <vector>

#include "cmsc/image.hpp"
#include "cmsc/tensor.hpp"

namespace cmsc::io {

/// One training example: n frames of context around a grid cell, and the
/// next frame's patch at that cell.
struct PatchSample {
  Tensor context;  // n x context x context
  Tensor target;   // 1 x patch x patch
  int row = 0;
  int col = 0;
  int frame = 0;  // index of the last input frame
};

struct PatchGeometry {
  int patch = 32;
  int context = 96;
  int n_frames = 4;

  /// Top-left corner of a cell's context window in image coordinates.
  int window_origin(int cell) const { return cell * patch - (context - patch) / 2; }
};

/// Writes the context window of cell (row, col) for each of `frames` into
/// `dst` (frames.size() x context x context). Pixels outside the image are 0.
void fill_context(std::span<const BoundaryImage* const> frames, int row, int col,
                  const PatchGeometry& geo, float* dst);

/// Copies the patch of cell (row, col) from `frame` into `dst`.
void fill_patch(const BoundaryImage& frame, int row, int col, int patch, float* dst);

/// Every (t, cell) with t >= n-1 and a successor frame. Frame sides must be
/// divisible by the patch size.
std::vector<PatchSample> extract_patch_samples(std::span<const BoundaryImage> sequence,
                                               const PatchGeometry& geo);

/// Number of samples extract_patch_samples would emit.
std::size_t count_patch_samples(std::span<const BoundaryImage> sequence,
                                const PatchGeometry& geo);

/// Throws ShapeError unless the frame tiles exactly into patches.
void check_tiling(const BoundaryImage& frame, int patch);

}  // namespace cmsc::io
