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
#include <cmath>
#include <set>
#include <vector>

#include "cmsc/billiard.hpp"
#include "cmsc/rng.hpp"
#include "doctest.h"

using namespace cmsc;
using namespace cmsc::sim;

namespace {

// Independent ring oracle: per octant, the pixel nearest the true circle.
std::set<std::pair<int, int>> rounded_circle(int r) {
  std::set<std::pair<int, int>> out;
  for (int b = 0; b <= r; ++b) {
    const double a_real = std::sqrt(static_cast<double>(r) * r - static_cast<double>(b) * b);
    const int a = static_cast<int>(std::floor(a_real + 0.5));
    if (a < b) break;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1}) {
        out.insert({sx * a, sy * b});
        out.insert({sx * b, sy * a});
      }
  }
  return out;
}

bool admissible(const World& w) {
  for (const Ball& b : w.balls) {
    if (b.position.x < w.min_center(b) - 1e-9 || b.position.x > w.max_center(b) + 1e-9) return false;
    if (b.position.y < w.min_center(b) - 1e-9 || b.position.y > w.max_center(b) + 1e-9) return false;
  }
  for (std::size_t i = 0; i < w.balls.size(); ++i)
    for (std::size_t j = i + 1; j < w.balls.size(); ++j) {
      const double d = std::hypot(w.balls[i].position.x - w.balls[j].position.x,
                                  w.balls[i].position.y - w.balls[j].position.y);
      if (d < w.balls[i].radius + w.balls[j].radius - 1e-9) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("midpoint circle equals the rounded-circle oracle") {
  for (int r = 1; r <= 40; ++r) {
    const auto pts = midpoint_circle(r);
    const std::set<std::pair<int, int>> got(pts.begin(), pts.end());
    CHECK(got == rounded_circle(r));
    for (auto [x, y] : pts) {
      const double d = std::hypot(x, y);
      CHECK(d >= r - 0.5);
      CHECK(d < r + 0.5);
    }
  }
}

TEST_CASE("rasterize") {
  World empty;
  empty.side = 8;
  const BoundaryImage img = rasterize(empty);
  CHECK(img.count_nonzero() == 28);
  CHECK(img.at(0, 0) == 1.0f);
  CHECK(img.at(3, 3) == 0.0f);

  SeededRng rng(4);
  SimConfig cfg = SimConfig::desk();
  for (int t = 0; t < 20; ++t) {
    const World w = sample_world(cfg, rng);
    const BoundaryImage f = rasterize(w);
    const Ball& b = w.balls[0];
    const int cx = static_cast<int>(std::lround(b.position.x));
    const int cy = static_cast<int>(std::lround(b.position.y));
    std::size_t ring = 0;
    for (int y = 1; y < w.side - 1; ++y)
      for (int x = 1; x < w.side - 1; ++x) {
        const bool on = rounded_circle(6).count({x - cx, y - cy}) > 0;
        CHECK((f.at(y, x) != 0.0f) == on);
        ring += on;
      }
    CHECK(ring == midpoint_circle(6).size());
  }

  World two;
  two.side = 64;
  two.balls = {Ball{{15, 15}, {1, 0}, 6}, Ball{{40, 30}, {0, 1}, 6}};
  World a = two, b = two;
  a.balls.pop_back();
  b.balls.erase(b.balls.begin());
  const BoundaryImage ra = strip_border(rasterize(a)), rb = strip_border(rasterize(b));
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK_FALSE((ra.pixels()[i] != 0 && rb.pixels()[i] != 0));
  }
  CHECK(rasterize(two) == rasterize(two));
}

TEST_CASE("step: wall reflection and elastic swap") {
  World w;
  w.side = 96;
  const double r = 13;
  w.balls = {Ball{{w.min_center(Ball{{}, {}, r}) + 1, 50}, {-3, 0}, r}};
  const double x0 = w.balls[0].position.x;
  const World n = step(w);
  CHECK(n.balls[0].velocity.x == 3.0);
  CHECK(n.balls[0].position.x == doctest::Approx(2 * w.min_center(w.balls[0]) - (x0 - 3)));
  CHECK(n.balls[0].position.x >= n.min_center(n.balls[0]));

  World h;
  h.side = 128;
  h.balls = {Ball{{50, 60}, {2, 0}, 13}, Ball{{77, 60}, {-2, 0}, 13}};
  StepEvents ev;
  const World hn = step(h, &ev);
  CHECK(ev.ball_collisions == 1);
  CHECK(hn.balls[0].velocity.x == -2.0);
  CHECK(hn.balls[1].velocity.x == 2.0);
  CHECK(hn.balls[0].velocity.y == 0.0);
  CHECK(admissible(hn));
}

TEST_CASE("conservation over random multi-ball runs") {
  SeededRng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    SimConfig cfg = SimConfig::multi_ball(1 + trial % 3);
    World w = sample_world(cfg, rng);
    const double e0 = kinetic_energy(w);
    for (int s = 0; s < 200; ++s) {
      World prev = w;
      StepEvents ev;
      w = step(w, &ev);
      REQUIRE(admissible(w));
      if (ev.ball_collisions > 0 && ev.wall_collisions == 0) {
        double px0 = 0, py0 = 0, px1 = 0, py1 = 0;
        for (const Ball& b : prev.balls) px0 += b.velocity.x, py0 += b.velocity.y;
        for (const Ball& b : w.balls) px1 += b.velocity.x, py1 += b.velocity.y;
        CHECK(px1 == doctest::Approx(px0));
        CHECK(py1 == doctest::Approx(py0));
      }
    }
    CHECK(std::abs(kinetic_energy(w) - e0) <= 1e-6 * e0);
  }
}

TEST_CASE("sample_world distributions") {
  SUBCASE("side is uniform over the choices") {
    SeededRng rng(1);
    SimConfig cfg = SimConfig::single_ball();
    const int n = 10000;
    std::vector<int> counts(cfg.side_choices.size(), 0);
    for (int i = 0; i < n; ++i) {
      const World w = sample_world(cfg, rng);
      const auto it = std::find(cfg.side_choices.begin(), cfg.side_choices.end(), w.side);
      REQUIRE(it != cfg.side_choices.end());
      ++counts[static_cast<std::size_t>(it - cfg.side_choices.begin())];
    }
    const double p = 1.0 / counts.size();
    const double sigma = std::sqrt(n * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sigma);
  }
  SUBCASE("unbiased positions are uniform (Kolmogorov-Smirnov)") {
    SeededRng rng(2);
    SimConfig cfg = SimConfig::single_ball();
    cfg.side_choices = {96};
    cfg.wall_band_bias = 0.0;
    const int n = 4000;
    std::vector<double> xs, ys;
    World probe;
    probe.side = 96;
    const Ball ref{{}, {}, cfg.radius};
    const double lo = probe.min_center(ref), hi = probe.max_center(ref);
    for (int i = 0; i < n; ++i) {
      const World w = sample_world(cfg, rng);
      xs.push_back((w.balls[0].position.x - lo) / (hi - lo));
      ys.push_back((w.balls[0].position.y - lo) / (hi - lo));
    }
    for (auto* v : {&xs, &ys}) {
      std::sort(v->begin(), v->end());
      double d = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = (*v)[static_cast<std::size_t>(i)];
        d = std::max({d, std::abs((i + 1.0) / n - u), std::abs(u - static_cast<double>(i) / n)});
      }
      CHECK(d < 1.95 / std::sqrt(n));  // alpha = 0.001
    }
  }
  SUBCASE("biased positions land in the wall band") {
    SeededRng rng(3);
    SimConfig cfg = SimConfig::single_ball();
    cfg.wall_band_bias = 1.0;
    for (int i = 0; i < 500; ++i) {
      const World w = sample_world(cfg, rng);
      const Ball& b = w.balls[0];
      const double gap = std::min({b.position.x - w.min_center(b), w.max_center(b) - b.position.x,
                                   b.position.y - w.min_center(b), w.max_center(b) - b.position.y});
      CHECK(gap <= cfg.wall_band);
    }
  }
  SUBCASE("velocities exclude rest") {
    SeededRng rng(4);
    SimConfig cfg = SimConfig::desk();
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < 2000; ++i) {
      const Ball b = sample_world(cfg, rng).balls[0];
      seen.insert({static_cast<int>(b.velocity.x), static_cast<int>(b.velocity.y)});
    }
    CHECK(seen.size() == 24);
    CHECK(seen.count({0, 0}) == 0);
  }
  SUBCASE("overcrowded tables fail") {
    SeededRng rng(5);
    SimConfig cfg = SimConfig::multi_ball(20);
    cfg.side_choices = {96};
    CHECK_THROWS_AS(sample_world(cfg, rng), ConfigError);
  }
}

TEST_CASE("sample_sequence") {
  SeededRng rng(9);
  for (int i = 0; i < 200; ++i) {
    const Sequence s = sample_sequence(SimConfig::single_ball(), rng);
    CHECK(s.wall_collisions <= 2);
    CHECK(s.frames.size() >= 2);
    CHECK(s.frames.size() <= 64);
    CHECK(s.frames.front() != s.frames.back());
    CHECK(s.frames.size() == s.worlds.size());
  }
  SeededRng mrng(10);
  const Sequence m = sample_sequence(SimConfig::multi_ball(3), mrng);
  CHECK(m.frames.size() <= 200);
  for (const World& w : m.worlds) CHECK(admissible(w));

  SeededRng a(123), b(123);
  const Sequence sa = sample_sequence(SimConfig::desk(), a);
  const Sequence sb = sample_sequence(SimConfig::desk(), b);
  CHECK(sa.frames == sb.frames);
}

TEST_CASE("strip_border") {
  World empty;
  empty.side = 16;
  CHECK(strip_border(rasterize(empty)).count_nonzero() == 0);
  World w;
  w.side = 64;
  w.balls = {Ball{{30, 30}, {1, 1}, 6}};
  const BoundaryImage f = rasterize(w);
  const BoundaryImage s = strip_border(f);
  CHECK(s.count_nonzero() == midpoint_circle(6).size());
  CHECK(strip_border(s) == s);
}
