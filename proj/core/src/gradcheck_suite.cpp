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

#include <algorithm>
#include <string>
#include <vector>

#include "cmsc/grad_check.hpp"
#include "cmsc/model.hpp"
#include "cmsc/pipeline.hpp"
#include "cmsc/rng.hpp"

namespace cmsc::pipeline {

namespace {

using OpFn = std::function<Var(Tape<double>&, Var)>;

Tensor64 random_tensor(Shape shape, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor64 t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// mse against a fixed random target of the op's output shape.
Var mse_head(Tape<double>& tape, Var y, std::uint64_t seed) {
  SeededRng rng(seed ^ 0x5eedULL);
  Var target = tape.constant(random_tensor(tape.value(y).shape(), rng));
  return ops::mse_loss(tape, y, target);
}

// y = x * x with a pullback that drops the factor 2.
Var broken_square(Tape<double>& tape, Var a) {
  Tensor64 out = tape.value(a);
  for (double& v : out.data()) v = v * v;
  return tape.record(std::move(out), tape.requires_grad(a), [a](Tape<double>& t, Var self) {
    const auto x = t.value(a).data();
    const auto gy = t.grad(self).data();
    double* gx = t.grad_accumulator(a).ptr();
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += x[i] * gy[i];
  });
}

struct OpCase {
  std::string name;
  Shape input;
  OpFn op;
  bool expect_failure = false;
};

GradCheckLine check_op(const OpCase& c, int seeds, double tolerance) {
  GradCheckLine line{c.name, 0.0, 0, 0, c.expect_failure, false};
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(s);
    SeededRng rng(seed);
    const Tensor64 x = random_tensor(c.input, rng);
    const ScalarFn fn = [&](Tape<double>& tape, Var in) {
      return mse_head(tape, c.op(tape, in), seed);
    };
    const GradCheckResult r = grad_check(fn, x, {}, GradCheckOptions{1e-5, 0, seed});
    line.max_rel_error = std::max(line.max_rel_error, r.max_rel_error);
    line.coords += r.coords_checked;
  }
  line.passed = c.expect_failure ? line.max_rel_error > tolerance : line.max_rel_error <= tolerance;
  return line;
}

GradCheckLine check_conv(int seeds, double tolerance) {
  GradCheckLine line{"conv2d_same", 0.0, 0, 0, false, false};
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = 2000 + static_cast<std::uint64_t>(s);
    SeededRng rng(seed);
    std::vector<Parameter<double>> params;
    params.emplace_back("weight", random_tensor(Shape{4, 3, 3, 3}, rng));
    params.emplace_back("bias", random_tensor(Shape{4}, rng));
    const Tensor64 x = random_tensor(Shape{2, 3, 6, 6}, rng);
    const ScalarFn fn = [&](Tape<double>& tape, Var in) {
      Var w = tape.parameter(params[0]);
      Var b = tape.parameter(params[1]);
      return mse_head(tape, ops::conv2d_same(tape, in, w, b), seed);
    };
    const GradCheckResult r = grad_check(fn, x, params, GradCheckOptions{1e-5, 0, seed});
    line.max_rel_error = std::max(line.max_rel_error, r.max_rel_error);
    line.coords += r.coords_checked;
  }
  line.passed = line.max_rel_error <= tolerance;
  return line;
}

GradCheckLine check_model(const std::string& name, const CmscConfig& config, int batch,
                          int target_side, int seeds, double tolerance, std::size_t coords) {
  GradCheckLine line{name, 0.0, 0, 0, false, false};
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = 3000 + static_cast<std::uint64_t>(s);
    SeededRng rng(seed);
    Model64 model = build_model(config, rng).cast<double>();
    // Nonzero biases so the bias pullbacks are exercised away from zero.
    for (auto& p : model.params) {
      if (p.value.rank() == 1) {
        for (double& v : p.value.data()) v = rng.uniform(-0.1, 0.1);
      }
    }
    const Tensor64 x =
        random_tensor(Shape{batch, config.n_frames, config.context, config.context}, rng, 0.0, 1.0);
    const Tensor64 target =
        random_tensor(Shape{batch, 1, target_side, target_side}, rng, 0.0, 1.0);
    const ScalarFn fn = [&](Tape<double>& tape, Var in) {
      const ForwardPass<double> pass = forward(tape, model, in, true);
      return training_loss(tape, pass, target, config);
    };
    // A bias step shifts every pre-activation of its channel, so some probes
    // straddle a ReLU or pooling kink; those are detected and skipped.
    const GradCheckResult r =
        grad_check(fn, x, model.params, GradCheckOptions{1e-6, coords, seed, 2e-5});
    line.max_rel_error = std::max(line.max_rel_error, r.max_rel_error);
    line.coords += r.coords_checked;
    line.skipped += r.coords_skipped;
  }
  // More than 1% skipped would hide real errors behind the kink test.
  line.passed = line.max_rel_error <= tolerance && line.skipped * 100 <= line.coords;
  return line;
}

}  // namespace

std::vector<GradCheckLine> run_gradcheck_suite(int seeds, double tolerance) {
  if (seeds < 1) throw ConfigError("gradcheck: seeds must be >= 1");
  const std::vector<OpCase> cases = {
      {"maxpool2", {2, 2, 6, 6}, [](Tape<double>& t, Var x) { return ops::maxpool2(t, x); }},
      {"avgpool2", {2, 2, 6, 6}, [](Tape<double>& t, Var x) { return ops::avgpool2(t, x); }},
      {"upsample2", {2, 2, 3, 3}, [](Tape<double>& t, Var x) { return ops::upsample2(t, x); }},
      {"relu", {2, 2, 4, 4}, [](Tape<double>& t, Var x) { return ops::relu(t, x); }},
      {"bounded_out", {2, 2, 4, 4},
       [](Tape<double>& t, Var x) { return ops::bounded_out(t, x); }},
      {"concat_channels", {2, 2, 4, 4},
       [](Tape<double>& t, Var x) { return ops::concat_channels(t, x, ops::square(t, x)); }},
      {"crop_center", {1, 2, 8, 8},
       [](Tape<double>& t, Var x) { return ops::crop_center(t, x, 4); }},
      {"square", {2, 2, 3, 3}, [](Tape<double>& t, Var x) { return ops::square(t, x); }},
      {"add", {2, 2, 3, 3},
       [](Tape<double>& t, Var x) { return ops::add(t, x, ops::square(t, x)); }},
      {"mean", {2, 2, 3, 3}, [](Tape<double>& t, Var x) { return ops::mean(t, x); }},
      {"select", {2, 2, 3, 3},
       [](Tape<double>& t, Var x) { return ops::select(t, ops::square(t, x), 7); }},
      {"mse_loss", {2, 1, 4, 4}, [](Tape<double>&, Var x) { return x; }},
  };
  std::vector<GradCheckLine> lines;
  lines.push_back(check_conv(seeds, tolerance));
  for (const auto& c : cases) lines.push_back(check_op(c, seeds, tolerance));

  CmscConfig level = CmscConfig::desk();
  level.n_levels = 1;
  level.patch = 4;
  level.context = 12;
  lines.push_back(check_model("level", level, 1, level.context, seeds, tolerance, 12));

  CmscConfig two = CmscConfig::desk();
  two.n_levels = 2;
  two.patch = 8;
  two.context = 24;
  two.filters = {4, 8, 8, 8, 4};
  lines.push_back(check_model("model_two_level", two, 2, two.context, seeds, tolerance, 24));

  lines.push_back(check_op(
      {"negative_control", {2, 2, 3, 3}, [](Tape<double>& t, Var x) { return broken_square(t, x); },
       true},
      seeds, tolerance));
  return lines;
}

}  // namespace cmsc::pipeline
