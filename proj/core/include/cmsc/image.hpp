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

#include <cstddef>
#include <span>
#include <vector>

#include "cmsc/error.hpp"

namespace cmsc {

/// H x W grid of boundary confidences in [0, 1].
class BoundaryImage {
 public:
  BoundaryImage() = default;
  BoundaryImage(int height, int width, float fill = 0.0f)
      : height_(height), width_(width),
        pixels_(static_cast<std::size_t>(checked(height)) * checked(width), fill) {}
  BoundaryImage(int height, int width, std::vector<float> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(checked(height)) * checked(width)) {
      throw ShapeError("BoundaryImage: pixel count does not match extents");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }

  float& at(int y, int x) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  float at(int y, int x) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  bool contains(int y, int x) const { return y >= 0 && x >= 0 && y < height_ && x < width_; }

  std::span<float> pixels() { return pixels_; }
  std::span<const float> pixels() const { return pixels_; }

  bool same_size(const BoundaryImage& o) const {
    return height_ == o.height_ && width_ == o.width_;
  }

  std::size_t count_nonzero() const {
    std::size_t n = 0;
    for (float v : pixels_) n += v != 0.0f;
    return n;
  }

  friend bool operator==(const BoundaryImage&, const BoundaryImage&) = default;

 private:
  static int checked(int extent) {
    if (extent < 0) throw ShapeError("BoundaryImage: negative extent");
    return extent;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> pixels_;
};

}  // namespace cmsc
