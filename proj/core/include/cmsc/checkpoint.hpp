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

#include "cmsc/model.hpp"

namespace cmsc::io {

/// CMSCKPT1 layout (little-endian):
///   "CMSCKPT1" | u32 header_length | UTF-8 header | f32 payload
/// The header is key=value lines: the model config, `step`, `lineage`, and
/// one `param=<name> <d0,d1,...> <byte offset>` line per tensor.
struct Checkpoint {
  Model model;
  std::int64_t step = 0;
  /// Free-form record of what the weights were trained on (curriculum chain).
  std::string lineage;
};

std::vector<std::uint8_t> save_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::string& path);

/// Copies `source` weights into `target`, which must have identical names
/// and shapes. Throws ShapeError naming the first mismatching parameter.
void load_weights(Model& target, const Model& source);

}  // namespace cmsc::io
