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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cmsc/error.hpp"

namespace cmsc {

using Shape = std::vector<int>;

/// Element count; 0 if any extent is negative (the tensor then rejects it).
inline std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= d < 0 ? 0 : static_cast<std::size_t>(d);
  return n;
}

std::string shape_string(const Shape& shape);

/// Hands out 64-byte aligned blocks. Vectorized kernels peel loops by
/// alignment, so a fixed alignment keeps reduction order, and therefore
/// results, identical from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major n-d array. Images use N x C x H x W (or C x H x W).
///
/// `float` is the working precision; `double` is used for gradient checks.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    check_extents();
  }

  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    check_extents();
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(int c, int y, int x) { return data_[offset3(c, y, x)]; }
  const T& at(int c, int y, int x) const { return data_[offset3(c, y, x)]; }
  T& at(int n, int c, int y, int x) { return data_[offset4(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const {
    return data_[offset4(n, c, y, x)];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Same data, new extents; total size must agree.
  BasicTensor reshaped(Shape shape) const {
    BasicTensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    out.check_extents();
    if (out.data_.size() != shape_size(out.shape_)) {
      throw ShapeError("reshape to " + shape_string(out.shape_) + " changes the element count");
    }
    return out;
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  T sum() const { return std::accumulate(data_.begin(), data_.end(), T(0)); }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_extents() const {
    for (int d : shape_) {
      if (d < 0) throw ShapeError("negative extent in shape " + shape_string(shape_));
    }
  }
  std::size_t offset3(int c, int y, int x) const {
    const std::size_t r = shape_.size();
    return (static_cast<std::size_t>(c) * shape_[r - 2] + y) * shape_[r - 1] + x;
  }
  std::size_t offset4(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) *
               shape_[3] +
           x;
  }

  Shape shape_;
  AlignedVector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace cmsc
