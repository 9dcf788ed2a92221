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

#include "cmsc/autodiff.hpp"

namespace cmsc {

struct GradCheckOptions {
  double step = 1e-5;
  /// Coordinates probed per tensor; 0 checks every coordinate.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  /// When > 0, a coordinate whose forward and backward one-sided differences
  /// differ by more than this (relative) straddles a kink and is skipped.
  double kink_tolerance = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;
  std::string worst;  // "input[17]" or "<param name>[k]"
};

/// |a - n| / max(1, |a|, |n|)
double relative_error(double analytic, double numeric);

/// Builds a scalar loss on a fresh tape from `input`. Any parameters the
/// function reads must be passed to grad_check as well, so they can be
/// perturbed in place.
using ScalarFn = std::function<Var(Tape<double>&, Var input)>;

/// Compares reverse-mode gradients against central differences. Throws
/// NumericalError when the loss or a gradient is not finite.
GradCheckResult grad_check(const ScalarFn& fn, const Tensor64& input,
                           std::span<Parameter<double>> params,
                           const GradCheckOptions& options = {});

}  // namespace cmsc
