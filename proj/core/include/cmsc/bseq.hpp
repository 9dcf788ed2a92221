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

/// BSEQ layout (little-endian):
///   "BSEQ" | u8 version=1 | u32 n_frames | u32 height | u32 width | u8 dtype
///   | frame-major, row-major payload
/// dtype 0 stores u8 with 255 -> 1.0; dtype 1 stores 32-bit floats.
enum class BseqDtype : std::uint8_t { kU8 = 0, kF32 = 1 };

inline constexpr std::size_t kBseqHeaderSize = 4 + 1 + 12 + 1;

std::vector<std::uint8_t> write_bseq(std::span<const BoundaryImage> frames,
                                     BseqDtype dtype = BseqDtype::kF32);

/// Throws DecodeError on bad magic, version, dtype, length or out-of-range values.
std::vector<BoundaryImage> read_bseq(std::span<const std::uint8_t> bytes);

void save_bseq(const std::string& path, std::span<const BoundaryImage> frames,
               BseqDtype dtype = BseqDtype::kF32);
std::vector<BoundaryImage> load_bseq(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

namespace le {
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
std::uint32_t get_u32(const std::uint8_t* p);
void put_f32(std::vector<std::uint8_t>& out, float v);
float get_f32(const std::uint8_t* p);
}  // namespace le

}  // namespace cmsc::io
