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

#include <set>
#include <utility>
#include <vector>

#include "cmsc/model.hpp"
#include "cmsc/rng.hpp"
#include "doctest.h"

using namespace cmsc;

namespace {

std::size_t parameter_count_by_hand(const CmscConfig& c) {
  std::size_t total = 0;
  for (int l = 0; l < c.n_levels; ++l) {
    const int in = c.n_frames + (l > 0 ? 1 : 0);
    const auto& f = c.filters;
    const std::vector<std::pair<int, int>> layers = {
        {in, f[0]},   {f[0], f[0]}, {f[0], f[1]}, {f[1], f[1]}, {f[1], f[2]},
        {f[2], f[2]}, {f[2], f[3]}, {f[3], f[3]}, {f[3], f[4]}, {f[4], 1}};
    for (auto [ci, co] : layers) total += static_cast<std::size_t>(9 * ci * co + co);
  }
  return total;
}

Tensor random_frames(int n, const CmscConfig& c, std::uint64_t seed) {
  SeededRng rng(seed);
  Tensor t(Shape{n, c.n_frames, c.context, c.context});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform01());
  return t;
}

CmscConfig small_config() {
  CmscConfig c = CmscConfig::desk();
  c.n_levels = 2;
  c.patch = 8;
  c.context = 24;
  c.filters = {4, 6, 8, 6, 4};
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(CmscConfig::full().validate());
  CHECK_NOTHROW(CmscConfig::desk().validate());
  CmscConfig c = CmscConfig::desk();
  c.context = 40;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = CmscConfig::desk();
  c.n_levels = 4;  // coarsest scale 6 is not divisible by 4
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = CmscConfig::desk();
  c.context = c.patch;
  CHECK_NOTHROW(c.validate());

  const CmscConfig p = CmscConfig::full();
  CHECK(p.level_scale(0) == 12);
  CHECK(p.level_scale(3) == 96);
  CHECK(p.level_crop(0) == 4);
  CHECK(CmscConfig::from_kv(p.to_kv()) == p);
}

TEST_CASE("build_model") {
  SeededRng a(5), b(5);
  const Model m1 = build_model(CmscConfig::full(), a);
  const Model m2 = build_model(CmscConfig::full(), b);
  CHECK(m1.parameter_count() == parameter_count_by_hand(CmscConfig::full()));
  CHECK(m1.params.size() == 4 * 20);
  std::set<std::string> names;
  for (std::size_t i = 0; i < m1.params.size(); ++i) {
    names.insert(m1.params[i].name);
    CHECK(m1.params[i].value == m2.params[i].value);
  }
  CHECK(names.size() == m1.params.size());

  CmscConfig one = small_config();
  one.n_levels = 1;
  one.context = 24;
  one.patch = 8;
  SeededRng r(1);
  const Model single = build_model(one, r);
  CHECK(single.params.size() == 20);
  CHECK(single.params.front().value.dim(1) == one.n_frames);
  CHECK(single.parameter_count() == parameter_count_by_hand(one));
}

TEST_CASE("downsample_pyramid") {
  const CmscConfig p = CmscConfig::full();
  Tensor frames(Shape{1, p.n_frames, 96, 96});
  frames.at(0, 0, 40, 40) = 1.0f;
  const auto pyr = downsample_pyramid(frames, p);
  REQUIRE(pyr.size() == 4);
  CHECK(pyr[3].dim(2) == 96);
  CHECK(pyr[2].at(0, 0, 20, 20) == doctest::Approx(0.25));
  CHECK(pyr[1].at(0, 0, 10, 10) == doctest::Approx(1.0 / 16));
  CHECK(pyr[0].at(0, 0, 5, 5) == doctest::Approx(1.0 / 64));

  const Tensor c(Shape{1, p.n_frames, 96, 96}, 0.4f);
  for (const auto& level : downsample_pyramid(c, p)) {
    for (float v : level.data()) CHECK(v == doctest::Approx(0.4f));
  }

  const CmscConfig s = small_config();
  const Tensor r = random_frames(2, s, 3);
  const auto rp = downsample_pyramid(r, s);
  for (int n = 0; n < 2; ++n)
    for (int ch = 0; ch < s.n_frames; ++ch)
      for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x) {
          double sum = 0.0;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) sum += r.at(n, ch, 2 * y + dy, 2 * x + dx);
          CHECK(rp[0].at(n, ch, y, x) == doctest::Approx(sum / 4).epsilon(1e-6));
        }
}

TEST_CASE("forward shapes and output range") {
  SeededRng rng(2);
  Model full_model = build_model(CmscConfig::full(), rng);
  Tape<float> tape;
  Var in = tape.constant(random_frames(1, full_model.config, 4));
  const auto pass = forward(tape, full_model, in, false);
  REQUIRE(pass.level_outputs.size() == 4);
  const int sides[] = {12, 24, 48, 96};
  for (int l = 0; l < 4; ++l) {
    CHECK(tape.value(pass.level_outputs[static_cast<std::size_t>(l)]).shape() ==
          Shape{1, 1, sides[l], sides[l]});
  }
  const Tensor& pred = tape.value(pass.prediction);
  CHECK(pred.shape() == Shape{1, 1, 32, 32});
  for (float v : pred.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }

  Model zero = build_model(small_config(), rng);
  for (auto& p : zero.params) p.value.fill(0.0f);
  const Tensor out = predict(zero, random_frames(3, zero.config, 5));
  for (float v : out.data()) CHECK(v == 0.5f);

  CHECK_THROWS_AS(predict(zero, Tensor(Shape{1, 3, 24, 24})), ShapeError);
}

TEST_CASE("training_loss") {
  CmscConfig one = small_config();
  one.n_levels = 1;
  SeededRng rng(1);
  Model zero = build_model(one, rng);
  for (auto& p : zero.params) p.value.fill(0.0f);
  {
    Tape<float> tape;
    const auto pass = forward(tape, zero, tape.constant(random_frames(2, one, 1)), false);
    const Var l = training_loss(tape, pass, Tensor(Shape{2, 1, 24, 24}), one);
    CHECK(tape.value(l)[0] == doctest::Approx(0.25));
    const Var perfect = training_loss(tape, pass, Tensor(Shape{2, 1, 8, 8}, 0.5f), one);
    CHECK(tape.value(perfect)[0] == 0.0f);
  }

  // Two levels, deep supervision: sum over levels of the central-crop MSE
  // against the down-averaged central target patch.
  const CmscConfig s = small_config();
  Model m = build_model(s, rng);
  SeededRng trng(9);
  Tensor target(Shape{2, 1, 24, 24});
  for (float& v : target.data()) v = static_cast<float>(trng.uniform01());
  Tape<float> tape;
  const auto pass = forward(tape, m, tape.constant(random_frames(2, s, 2)), false);
  const double got = tape.value(training_loss(tape, pass, target, s))[0];

  const Tensor& coarse = tape.value(pass.level_outputs[0]);  // 12x12, crop 4
  const Tensor& fine = tape.value(pass.level_outputs[1]);    // 24x24, crop 8
  double coarse_sse = 0.0, fine_sse = 0.0;
  for (int n = 0; n < 2; ++n) {
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const double d = fine.at(n, 0, 8 + y, 8 + x) - target.at(n, 0, 8 + y, 8 + x);
        fine_sse += d * d;
      }
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        double avg = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) avg += target.at(n, 0, 8 + 2 * y + dy, 8 + 2 * x + dx);
        const double d = coarse.at(n, 0, 4 + y, 4 + x) - avg / 4;
        coarse_sse += d * d;
      }
  }
  CHECK(got == doctest::Approx(fine_sse / 128 + coarse_sse / 32).epsilon(1e-5));

  CHECK_THROWS_AS(training_loss(tape, pass, Tensor(Shape{2, 1, 10, 10}), s), ShapeError);
}

TEST_CASE("receptive_field_probe") {
  const CmscConfig c = CmscConfig::desk();
  const Footprint centre = receptive_field_probe(c, c.patch / 2, c.patch / 2);
  CHECK(centre.height() == centre.width());
  CHECK(centre.width() > c.patch);
  const int last = c.patch - 1;
  for (auto [y, x] : std::vector<std::pair<int, int>>{{0, 0}, {0, last}, {last, 0}, {last, last}}) {
    const Footprint f = receptive_field_probe(c, y, x);
    CHECK(f.height() == centre.height());
    CHECK(f.width() == centre.width());
    CHECK(f.y0 >= 0);
    CHECK(f.x0 >= 0);
    CHECK(f.y1 < c.context);
    CHECK(f.x1 < c.context);
  }

  // Single level: walk the layer stack backwards from the output pixel,
  // growing the interval by one per 3x3 conv and mapping through each
  // resampling step, then clip to the window.
  CmscConfig one = c;
  one.n_levels = 1;
  auto interval = [&](int p) {
    int a = p, b = p;
    auto conv = [&] { --a, ++b; };
    auto up = [&] { a = a >> 1, b = b >> 1; };  // output pixel y reads y/2
    auto pool = [&] { a = 2 * a, b = 2 * b + 1; };
    conv(), conv(), up(), conv(), conv(), up(), conv(), conv(), pool(), conv(), conv(), pool(),
        conv(), conv();
    return std::pair{std::max(a, 0), std::min(b, one.context - 1)};
  };
  const int off = (one.context - one.patch) / 2;
  for (auto [y, x] : std::vector<std::pair<int, int>>{{0, 0}, {5, 11}, {last, last}, {8, 8}}) {
    const Footprint f = receptive_field_probe(one, y, x);
    const auto [y0, y1] = interval(off + y);
    const auto [x0, x1] = interval(off + x);
    CHECK(f.y0 == y0);
    CHECK(f.y1 == y1);
    CHECK(f.x0 == x0);
    CHECK(f.x1 == x1);
  }
  CHECK_THROWS_AS(receptive_field_probe(c, c.patch, 0), ShapeError);
}
