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

#include "cmsc/bseq.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cmsc::io {

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace le

namespace {

constexpr char kMagic[4] = {'B', 'S', 'E', 'Q'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> write_bseq(std::span<const BoundaryImage> frames, BseqDtype dtype) {
  const int h = frames.empty() ? 0 : frames.front().height();
  const int w = frames.empty() ? 0 : frames.front().width();
  for (const auto& f : frames) {
    if (f.height() != h || f.width() != w) {
      throw ShapeError("write_bseq: frames differ in size");
    }
    for (float v : f.pixels()) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw NumericalError("write_bseq: pixel value outside [0,1]");
      }
    }
  }
  const std::size_t elem = dtype == BseqDtype::kU8 ? 1 : 4;
  std::vector<std::uint8_t> out;
  out.reserve(kBseqHeaderSize + frames.size() * static_cast<std::size_t>(h) * w * elem);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  le::put_u32(out, static_cast<std::uint32_t>(frames.size()));
  le::put_u32(out, static_cast<std::uint32_t>(h));
  le::put_u32(out, static_cast<std::uint32_t>(w));
  out.push_back(static_cast<std::uint8_t>(dtype));
  for (const auto& f : frames) {
    for (float v : f.pixels()) {
      if (dtype == BseqDtype::kU8) {
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
      } else {
        le::put_f32(out, v);
      }
    }
  }
  return out;
}

std::vector<BoundaryImage> read_bseq(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBseqHeaderSize) {
    throw DecodeError("bseq: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DecodeError("bseq: bad magic");
  if (bytes[4] != kVersion) {
    throw DecodeError("bseq: unsupported version " + std::to_string(bytes[4]));
  }
  const std::uint64_t n = le::get_u32(bytes.data() + 5);
  const std::uint64_t h = le::get_u32(bytes.data() + 9);
  const std::uint64_t w = le::get_u32(bytes.data() + 13);
  const std::uint8_t dtype = bytes[17];
  if (dtype > 1) throw DecodeError("bseq: unknown dtype " + std::to_string(dtype));
  if (h > 1u << 16 || w > 1u << 16) throw DecodeError("bseq: implausible frame size");
  const std::uint64_t elem = dtype == 0 ? 1 : 4;
  const std::uint64_t expect = n * h * w * elem;
  if (bytes.size() - kBseqHeaderSize != expect) {
    throw DecodeError("bseq: payload is " + std::to_string(bytes.size() - kBseqHeaderSize) +
                      " bytes, header implies " + std::to_string(expect));
  }
  std::vector<BoundaryImage> frames;
  frames.reserve(n);
  const std::uint8_t* p = bytes.data() + kBseqHeaderSize;
  for (std::uint64_t f = 0; f < n; ++f) {
    BoundaryImage img(static_cast<int>(h), static_cast<int>(w));
    for (float& v : img.pixels()) {
      if (dtype == 0) {
        v = static_cast<float>(*p) / 255.0f;
        p += 1;
      } else {
        v = le::get_f32(p);
        p += 4;
        if (!(v >= 0.0f && v <= 1.0f)) {
          throw DecodeError("bseq: frame " + std::to_string(f) + " holds a value outside [0,1]");
        }
      }
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

void save_bseq(const std::string& path, std::span<const BoundaryImage> frames,
               BseqDtype dtype) {
  write_file(path, write_bseq(frames, dtype));
}

std::vector<BoundaryImage> load_bseq(const std::string& path) {
  return read_bseq(read_file(path));
}

}  // namespace cmsc::io
