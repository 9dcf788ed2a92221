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
#include <vector>

#include "cmsc/image.hpp"
#include "cmsc/rng.hpp"

namespace cmsc::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Ball {
  Vec2 position;  // centre, pixels
  Vec2 velocity;  // pixels per frame
  double radius = 13.0;
};

/// A square frictionless table. Pixel rows/columns 0 and side-1 form the
/// border; a ball's disc must stay inside the interior 1..side-2.
struct World {
  int side = 96;
  std::vector<Ball> balls;

  double min_center(const Ball& b) const { return 1.0 + b.radius; }
  double max_center(const Ball& b) const { return side - 2.0 - b.radius; }
};

struct SimConfig {
  std::vector<int> side_choices{96, 128, 160, 192, 256};
  int max_speed = 3;  // velocity components drawn from [-max_speed, max_speed]
  bool allow_zero_velocity = false;
  double radius = 13.0;
  int n_balls = 1;
  double wall_band_bias = 0.5;
  double wall_band = 40.0;
  /// Sequence ends before the collision that would exceed a limit drawn
  /// uniformly from [1, max_wall_collisions]. 0 disables the limit.
  int max_wall_collisions = 2;
  int max_frames = 64;
  int placement_attempts = 10000;

  static SimConfig single_ball();  // 500-sequence training preset
  static SimConfig multi_ball(int n_balls);
  static SimConfig desk();

  void validate() const;
};

struct StepEvents {
  int wall_collisions = 0;
  int ball_collisions = 0;
};

World sample_world(const SimConfig& config, SeededRng& rng);

/// Advances one frame: move, reflect off walls, resolve ball contacts.
World step(const World& world, StepEvents* events = nullptr);

/// Border ring plus one midpoint-circle ring per ball.
BoundaryImage rasterize(const World& world);

/// Integer offsets of a midpoint circle of the given radius around (0,0).
std::vector<std::pair<int, int>> midpoint_circle(int radius);

/// Zeroes the outermost pixel ring.
BoundaryImage strip_border(const BoundaryImage& image);

struct Sequence {
  std::vector<BoundaryImage> frames;
  std::vector<World> worlds;
  int wall_collisions = 0;
};

Sequence sample_sequence(const SimConfig& config, SeededRng& rng);

double kinetic_energy(const World& world);

}  // namespace cmsc::sim
