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
#include <span>
#include <vector>

#include "cmsc/autodiff.hpp"

namespace cmsc {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for a fixed list of parameters.
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<const Parameter<T>> params, AdamOptions options = {});

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::int64_t step_count() const { return step_; }

  const BasicTensor<T>& first_moment(std::size_t i) const { return m_.at(i); }
  const BasicTensor<T>& second_moment(std::size_t i) const { return v_.at(i); }

  /// One bias-corrected update of every parameter from its current grad.
  void step(std::span<Parameter<T>> params);

 private:
  AdamOptions options_;
  std::int64_t step_ = 0;
  std::vector<BasicTensor<T>> m_;
  std::vector<BasicTensor<T>> v_;
};

}  // namespace cmsc
