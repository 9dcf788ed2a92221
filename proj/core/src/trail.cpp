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

#include "cmsc/trail.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace cmsc::io {

BoundaryImage superimpose(std::span<const BoundaryImage> frames) {
  if (frames.empty()) throw ShapeError("superimpose: no frames");
  BoundaryImage out = frames.front();
  for (const auto& f : frames.subspan(1)) {
    if (!f.same_size(out)) throw ShapeError("superimpose: frames differ in size");
    auto dst = out.pixels();
    auto src = f.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const BoundaryImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (float v : image.pixels()) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0f)));
  }
  return out;
}

std::vector<std::uint8_t> encode_trail(std::span<const BoundaryImage> frames) {
  return encode_pgm(superimpose(frames));
}

BoundaryImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9' && digits < 9) {
      v = v * 10 + (bytes[pos++] - '0');
      ++digits;
    }
    if (digits == 0) throw DecodeError("pgm: expected an integer in header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw DecodeError("pgm: bad magic");
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (maxval != 255) throw DecodeError("pgm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("pgm: truncated header");
  ++pos;
  if (bytes.size() - pos != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw DecodeError("pgm: pixel payload length mismatch");
  }
  BoundaryImage img(static_cast<int>(h), static_cast<int>(w));
  for (float& v : img.pixels()) v = static_cast<float>(bytes[pos++]) / 255.0f;
  return img;
}

}  // namespace cmsc::io
