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

#include "cmsc/patches.hpp"

#include <algorithm>
#include <cstring>

namespace cmsc::io {

void check_tiling(const BoundaryImage& frame, int patch) {
  if (patch < 1 || frame.height() % patch || frame.width() % patch) {
    throw ShapeError("frame " + std::to_string(frame.height()) + "x" +
                     std::to_string(frame.width()) + " does not tile into " +
                     std::to_string(patch) + "-pixel patches");
  }
}

void fill_context(std::span<const BoundaryImage* const> frames, int row, int col,
                  const PatchGeometry& geo, float* dst) {
  const int oy = geo.window_origin(row), ox = geo.window_origin(col);
  const int c = geo.context;
  for (const BoundaryImage* f : frames) {
    std::fill(dst, dst + static_cast<std::size_t>(c) * c, 0.0f);
    const int y0 = std::max(0, oy), y1 = std::min(f->height(), oy + c);
    const int x0 = std::max(0, ox), x1 = std::min(f->width(), ox + c);
    for (int y = y0; y < y1; ++y) {
      if (x1 > x0) {
        std::memcpy(dst + static_cast<std::size_t>(y - oy) * c + (x0 - ox), f->pixels().data() + static_cast<std::size_t>(y) * f->width() + x0,
                    sizeof(float) * static_cast<std::size_t>(x1 - x0));
      }
    }
    dst += static_cast<std::size_t>(c) * c;
  }
}

void fill_patch(const BoundaryImage& frame, int row, int col, int patch, float* dst) {
  for (int y = 0; y < patch; ++y) {
    std::memcpy(dst + static_cast<std::size_t>(y) * patch,
                frame.pixels().data() +
                    static_cast<std::size_t>(row * patch + y) * frame.width() + col * patch,
                sizeof(float) * patch);
  }
}

std::size_t count_patch_samples(std::span<const BoundaryImage> sequence,
                                const PatchGeometry& geo) {
  const auto len = static_cast<int>(sequence.size());
  if (len < geo.n_frames + 1) return 0;
  check_tiling(sequence.front(), geo.patch);
  const std::size_t cells = static_cast<std::size_t>(sequence.front().height() / geo.patch) *
                            (sequence.front().width() / geo.patch);
  return static_cast<std::size_t>(len - geo.n_frames) * cells;
}

std::vector<PatchSample> extract_patch_samples(std::span<const BoundaryImage> sequence,
                                               const PatchGeometry& geo) {
  std::vector<PatchSample> out;
  if (static_cast<int>(sequence.size()) < geo.n_frames + 1) return out;
  const BoundaryImage& first = sequence.front();
  check_tiling(first, geo.patch);
  for (const auto& f : sequence) {
    if (!f.same_size(first)) throw ShapeError("extract_patch_samples: frames differ in size");
  }
  const int rows = first.height() / geo.patch, cols = first.width() / geo.patch;
  out.reserve(count_patch_samples(sequence, geo));
  std::vector<const BoundaryImage*> window(static_cast<std::size_t>(geo.n_frames));
  for (int t = geo.n_frames - 1; t + 1 < static_cast<int>(sequence.size()); ++t) {
    for (int i = 0; i < geo.n_frames; ++i) {
      window[static_cast<std::size_t>(i)] = &sequence[static_cast<std::size_t>(t - geo.n_frames + 1 + i)];
    }
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        PatchSample s;
        s.context = Tensor(Shape{geo.n_frames, geo.context, geo.context});
        s.target = Tensor(Shape{1, geo.patch, geo.patch});
        fill_context(window, r, c, geo, s.context.ptr());
        fill_patch(sequence[static_cast<std::size_t>(t) + 1], r, c, geo.patch, s.target.ptr());
        s.row = r;
        s.col = c;
        s.frame = t;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

}  // namespace cmsc::io
