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
#include <string>
#include <vector>

#include "cmsc/image.hpp"

namespace cmsc::io {

/// Per-pixel maximum over all frames.
BoundaryImage superimpose(std::span<const BoundaryImage> frames);

/// Binary PGM ("P5", maxval 255) of the superimposed frames.
std::vector<std::uint8_t> encode_trail(std::span<const BoundaryImage> frames);

std::vector<std::uint8_t> encode_pgm(const BoundaryImage& image);
BoundaryImage decode_pgm(std::span<const std::uint8_t> bytes);

}  // namespace cmsc::io
