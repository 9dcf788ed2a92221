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

#include "cmsc/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cmsc::sim {

SimConfig SimConfig::single_ball() { return SimConfig{}; }

SimConfig SimConfig::multi_ball(int n_balls) {
  SimConfig c;
  c.n_balls = n_balls;
  c.max_wall_collisions = 0;
  c.max_frames = 200;
  return c;
}

SimConfig SimConfig::desk() {
  SimConfig c;
  c.side_choices = {64};
  c.max_speed = 2;
  c.radius = 6.0;
  c.wall_band = 12.0;
  return c;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("sim config: " + m); };
  if (side_choices.empty()) fail("side_choices is empty");
  if (radius < 1.0) fail("radius must be >= 1");
  for (int s : side_choices) {
    if (s - 3 - 2 * radius < 0) fail("side " + std::to_string(s) + " cannot hold a ball");
  }
  if (max_speed < 0) fail("max_speed must be >= 0");
  if (max_speed == 0 && !allow_zero_velocity) {
    fail("velocity range is empty once (0,0) is excluded");
  }
  if (n_balls < 1) fail("n_balls must be >= 1");
  if (wall_band_bias < 0.0 || wall_band_bias > 1.0) fail("wall_band_bias must be in [0,1]");
  if (wall_band < 0.0) fail("wall_band must be >= 0");
  if (max_wall_collisions < 0) fail("max_wall_collisions must be >= 0");
  if (max_frames < 1) fail("max_frames must be >= 1");
  if (placement_attempts < 1) fail("placement_attempts must be >= 1");
}

namespace {

Vec2 sample_position(const World& world, const Ball& ball, const SimConfig& cfg,
                     SeededRng& rng) {
  const double lo = world.min_center(ball), hi = world.max_center(ball);
  const bool banded = rng.uniform01() < cfg.wall_band_bias;
  while (true) {
    Vec2 p{rng.uniform(lo, hi), rng.uniform(lo, hi)};
    if (!banded) return p;
    const double gap = std::min({p.x - lo, hi - p.x, p.y - lo, hi - p.y});
    if (gap <= cfg.wall_band) return p;
  }
}

bool overlaps(const Ball& a, const Ball& b) {
  const double dx = a.position.x - b.position.x, dy = a.position.y - b.position.y;
  const double r = a.radius + b.radius;
  return dx * dx + dy * dy < r * r;
}

// Mirrors a coordinate back into [lo, hi]; returns true when it was outside.
bool reflect_axis(double& p, double& v, double lo, double hi, bool flip_velocity) {
  bool hit = false;
  for (int guard = 0; guard < 64 && (p < lo || p > hi); ++guard) {
    if (p < lo) {
      p = 2 * lo - p;
      if (flip_velocity || v < 0) v = std::abs(v);
    } else {
      p = 2 * hi - p;
      if (flip_velocity || v > 0) v = -std::abs(v);
    }
    hit = true;
  }
  p = std::clamp(p, lo, hi);
  return hit;
}

}  // namespace

World sample_world(const SimConfig& config, SeededRng& rng) {
  config.validate();
  World world;
  world.side = config.side_choices[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(config.side_choices.size()) - 1))];
  int attempts = 0;
  for (int i = 0; i < config.n_balls; ++i) {
    Ball ball;
    ball.radius = config.radius;
    do {
      ball.velocity.x = static_cast<double>(rng.uniform_int(-config.max_speed, config.max_speed));
      ball.velocity.y = static_cast<double>(rng.uniform_int(-config.max_speed, config.max_speed));
    } while (!config.allow_zero_velocity && ball.velocity.x == 0 && ball.velocity.y == 0);
    while (true) {
      if (++attempts > config.placement_attempts) {
        throw ConfigError("sample_world: could not place " + std::to_string(config.n_balls) +
                          " balls of radius " + std::to_string(config.radius) +
                          " on a side-" + std::to_string(world.side) + " table within " +
                          std::to_string(config.placement_attempts) + " attempts");
      }
      ball.position = sample_position(world, ball, config, rng);
      const bool clear = std::none_of(world.balls.begin(), world.balls.end(),
                                      [&](const Ball& o) { return overlaps(o, ball); });
      if (clear) break;
    }
    world.balls.push_back(ball);
  }
  return world;
}

World step(const World& world, StepEvents* events) {
  World next = world;
  StepEvents ev;
  auto& balls = next.balls;
  // A ball counts one wall collision per step however many walls it touches.
  std::vector<char> hit_wall(balls.size(), 0);
  for (std::size_t i = 0; i < balls.size(); ++i) {
    Ball& b = balls[i];
    b.position.x += b.velocity.x;
    b.position.y += b.velocity.y;
    const double lo = next.min_center(b), hi = next.max_center(b);
    const bool hx = reflect_axis(b.position.x, b.velocity.x, lo, hi, true);
    const bool hy = reflect_axis(b.position.y, b.velocity.y, lo, hi, true);
    hit_wall[i] |= hx || hy;
  }

  // One impulse pass in pair order: exchange normal components and mirror
  // the penetration.
  const std::size_t n = balls.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Ball& a = balls[i];
      Ball& b = balls[j];
      double dx = b.position.x - a.position.x, dy = b.position.y - a.position.y;
      const double dist = std::hypot(dx, dy);
      const double reach = a.radius + b.radius;
      if (dist >= reach) continue;
      double nx = 1.0, ny = 0.0;
      if (dist > 0) {
        nx = dx / dist;
        ny = dy / dist;
      }
      const double rel = (a.velocity.x - b.velocity.x) * nx + (a.velocity.y - b.velocity.y) * ny;
      if (rel <= 0) continue;  // already separating
      a.velocity.x -= rel * nx;
      a.velocity.y -= rel * ny;
      b.velocity.x += rel * nx;
      b.velocity.y += rel * ny;
      const double depth = reach - dist;
      a.position.x -= nx * depth;
      a.position.y -= ny * depth;
      b.position.x += nx * depth;
      b.position.y += ny * depth;
      ++ev.ball_collisions;
    }
  }

  // Positional clean-up so that every emitted state is admissible.
  for (int pass = 0; pass < 32; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      Ball& b = balls[i];
      const double lo = next.min_center(b), hi = next.max_center(b);
      const double vx = b.velocity.x, vy = b.velocity.y;
      moved |= reflect_axis(b.position.x, b.velocity.x, lo, hi, false);
      moved |= reflect_axis(b.position.y, b.velocity.y, lo, hi, false);
      hit_wall[i] |= b.velocity.x != vx || b.velocity.y != vy;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Ball& a = balls[i];
        Ball& b = balls[j];
        const double dx = b.position.x - a.position.x, dy = b.position.y - a.position.y;
        const double dist = std::hypot(dx, dy);
        const double reach = a.radius + b.radius;
        if (dist >= reach) continue;
        const double nx = dist > 0 ? dx / dist : 1.0, ny = dist > 0 ? dy / dist : 0.0;
        const double push = (reach - dist) * 0.5 + 1e-9;
        a.position.x -= nx * push;
        a.position.y -= ny * push;
        b.position.x += nx * push;
        b.position.y += ny * push;
        moved = true;
      }
    }
    if (!moved) break;
  }
  ev.wall_collisions = static_cast<int>(std::count(hit_wall.begin(), hit_wall.end(), 1));
  if (events) *events = ev;
  return next;
}

std::vector<std::pair<int, int>> midpoint_circle(int radius) {
  std::vector<std::pair<int, int>> pts;
  if (radius <= 0) {
    pts.emplace_back(0, 0);
    return pts;
  }
  int x = radius, y = 0, err = 1 - radius;
  while (x >= y) {
    const std::pair<int, int> oct[8] = {{x, y},   {y, x},   {-y, x}, {-x, y},
                                        {-x, -y}, {-y, -x}, {y, -x}, {x, -y}};
    pts.insert(pts.end(), std::begin(oct), std::end(oct));
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

BoundaryImage rasterize(const World& world) {
  const int s = world.side;
  BoundaryImage img(s, s);
  for (int i = 0; i < s; ++i) {
    img.at(0, i) = img.at(s - 1, i) = 1.0f;
    img.at(i, 0) = img.at(i, s - 1) = 1.0f;
  }
  for (const Ball& b : world.balls) {
    const int cx = static_cast<int>(std::lround(b.position.x));
    const int cy = static_cast<int>(std::lround(b.position.y));
    for (const auto& [dx, dy] : midpoint_circle(static_cast<int>(std::lround(b.radius)))) {
      if (img.contains(cy + dy, cx + dx)) img.at(cy + dy, cx + dx) = 1.0f;
    }
  }
  return img;
}

BoundaryImage strip_border(const BoundaryImage& image) {
  BoundaryImage out = image;
  const int h = image.height(), w = image.width();
  for (int x = 0; x < w; ++x) {
    if (h > 0) out.at(0, x) = 0.0f;
    if (h > 1) out.at(h - 1, x) = 0.0f;
  }
  for (int y = 0; y < h; ++y) {
    if (w > 0) out.at(y, 0) = 0.0f;
    if (w > 1) out.at(y, w - 1) = 0.0f;
  }
  return out;
}

Sequence sample_sequence(const SimConfig& config, SeededRng& rng) {
  Sequence seq;
  World world = sample_world(config, rng);
  const int limit = config.max_wall_collisions > 0
                        ? static_cast<int>(rng.uniform_int(1, config.max_wall_collisions))
                        : std::numeric_limits<int>::max();
  seq.worlds.push_back(world);
  seq.frames.push_back(rasterize(world));
  while (static_cast<int>(seq.frames.size()) < config.max_frames) {
    StepEvents ev;
    World next = step(world, &ev);
    if (ev.wall_collisions > limit - seq.wall_collisions) break;
    seq.wall_collisions += ev.wall_collisions;
    world = std::move(next);
    seq.worlds.push_back(world);
    seq.frames.push_back(rasterize(world));
  }
  return seq;
}

double kinetic_energy(const World& world) {
  double e = 0.0;
  for (const Ball& b : world.balls) {
    e += b.velocity.x * b.velocity.x + b.velocity.y * b.velocity.y;
  }
  return e;
}

}  // namespace cmsc::sim
