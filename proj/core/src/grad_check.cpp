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

#include "cmsc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmsc/rng.hpp"

namespace cmsc {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

namespace {

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t limit, SeededRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= n) return idx;
  for (std::size_t i = 0; i < limit; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double eval_loss(const ScalarFn& fn, const Tensor64& input) {
  Tape<double> tape;
  Var in = tape.constant(input);
  const double loss = tape.value(fn(tape, in))[0];
  if (!std::isfinite(loss)) throw NumericalError("grad_check: non-finite loss");
  return loss;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const Tensor64& input,
                           std::span<Parameter<double>> params,
                           const GradCheckOptions& options) {
  for (auto& p : params) {
    p.grad = Tensor64(p.value.shape());
  }
  Tape<double> tape;
  Var in = tape.input(input);
  Var loss = fn(tape, in);
  if (!std::isfinite(tape.value(loss)[0])) {
    throw NumericalError("grad_check: non-finite loss");
  }
  tape.backward(loss);
  const Tensor64 input_grad = tape.grad(in);
  if (!input_grad.all_finite()) throw NumericalError("grad_check: non-finite input gradient");
  for (const auto& p : params) {
    if (!p.grad.all_finite()) {
      throw NumericalError("grad_check: non-finite gradient for '" + p.name + "'");
    }
  }

  GradCheckResult result;
  SeededRng rng(options.seed);
  const double h = options.step;
  const double base = options.kink_tolerance > 0.0 ? eval_loss(fn, input) : 0.0;
  auto consider = [&](double analytic, double up, double down, const std::string& where) {
    const double numeric = (up - down) / (2 * h);
    if (options.kink_tolerance > 0.0) {
      const double fwd = (up - base) / h, bwd = (base - down) / h;
      if (std::abs(fwd - bwd) > options.kink_tolerance * std::max(1.0, std::abs(numeric))) {
        ++result.coords_skipped;
        return;
      }
    }
    const double err = relative_error(analytic, numeric);
    ++result.coords_checked;
    if (result.worst.empty() || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = where;
    }
  };

  Tensor64 probe = input;
  for (std::size_t k : pick_coords(input.size(), options.max_coords_per_tensor, rng)) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = eval_loss(fn, probe);
    probe[k] = orig - h;
    const double down = eval_loss(fn, probe);
    probe[k] = orig;
    consider(input_grad[k], up, down, "input[" + std::to_string(k) + "]");
  }
  for (auto& p : params) {
    const Tensor64 analytic = p.grad;
    for (std::size_t k : pick_coords(p.value.size(), options.max_coords_per_tensor, rng)) {
      const double orig = p.value[k];
      p.value[k] = orig + h;
      const double up = eval_loss(fn, input);
      p.value[k] = orig - h;
      const double down = eval_loss(fn, input);
      p.value[k] = orig;
      consider(analytic[k], up, down, p.name + "[" + std::to_string(k) + "]");
    }
  }
  return result;
}

}  // namespace cmsc
