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

// Microbenchmarks for the hot paths: convolution, model passes, the
// simulator and the boundary matcher.

#include <benchmark/benchmark.h>

#include <vector>

#include "cmsc/adam.hpp"
#include "cmsc/autodiff.hpp"
#include "cmsc/billiard.hpp"
#include "cmsc/metrics.hpp"
#include "cmsc/model.hpp"
#include "cmsc/rng.hpp"

namespace {

using namespace cmsc;

Tensor random_tensor(Shape shape, SeededRng& rng) {
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Args: batch, channels in, channels out, spatial size.
void BM_Conv2dSame(benchmark::State& state) {
  SeededRng rng(1);
  const int n = static_cast<int>(state.range(0)), cin = static_cast<int>(state.range(1));
  const int cout = static_cast<int>(state.range(2)), s = static_cast<int>(state.range(3));
  const Tensor x = random_tensor(Shape{n, cin, s, s}, rng);
  const Tensor w = random_tensor(Shape{cout, cin, 3, 3}, rng);
  const Tensor b = random_tensor(Shape{cout}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::conv2d_same(x, w, b));
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * n * cout * cin * 9 * s * s,
                                                 benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv2dSame)->Args({16, 16, 16, 48})->Args({16, 32, 64, 12})->Args({1, 4, 32, 96});

void BM_Predict(benchmark::State& state) {
  SeededRng rng(2);
  const CmscConfig cfg = CmscConfig::desk();
  const Model model = build_model(cfg, rng);
  const int n = static_cast<int>(state.range(0));
  const Tensor x = random_tensor(Shape{n, cfg.n_frames, cfg.context, cfg.context}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, x));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Predict)->Arg(1)->Arg(16);

void BM_TrainStep(benchmark::State& state) {
  SeededRng rng(3);
  const CmscConfig cfg = CmscConfig::desk();
  Model model = build_model(cfg, rng);
  AdamState<float> adam(model.params);
  const int n = static_cast<int>(state.range(0));
  const Tensor x = random_tensor(Shape{n, cfg.n_frames, cfg.context, cfg.context}, rng);
  Tensor y(Shape{n, 1, cfg.patch, cfg.patch});
  for (auto _ : state) {
    for (auto& p : model.params) p.zero_grad();
    Tape<float> tape;
    const ForwardPass<float> pass = forward(tape, model, tape.constant(x), true);
    tape.backward(training_loss(tape, pass, y, cfg));
    adam.step(model.params);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainStep)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SimStep(benchmark::State& state) {
  SeededRng rng(4);
  sim::World w = sim::sample_world(sim::SimConfig::multi_ball(static_cast<int>(state.range(0))), rng);
  for (auto _ : state) {
    w = sim::step(w);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_SimStep)->Arg(1)->Arg(3);

void BM_Bpr(benchmark::State& state) {
  SeededRng rng(5);
  const int s = static_cast<int>(state.range(0));
  BoundaryImage pred(s, s), gt(s, s);
  for (float& v : pred.pixels()) v = rng.uniform01() < 0.05 ? 1.0f : 0.0f;
  for (float& v : gt.pixels()) v = rng.uniform01() < 0.05 ? 1.0f : 0.0f;
  for (auto _ : state) benchmark::DoNotOptimize(eval::bpr(pred, gt, 1));
}
BENCHMARK(BM_Bpr)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
