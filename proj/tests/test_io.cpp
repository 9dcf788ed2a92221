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

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cmsc/bseq.hpp"
#include "cmsc/checkpoint.hpp"
#include "cmsc/keyvalue.hpp"
#include "cmsc/patches.hpp"
#include "cmsc/rng.hpp"
#include "cmsc/trail.hpp"
#include "doctest.h"

using namespace cmsc;
using namespace cmsc::io;

namespace {

std::vector<BoundaryImage> random_frames(int n, int h, int w, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<BoundaryImage> out;
  for (int i = 0; i < n; ++i) {
    BoundaryImage f(h, w);
    for (float& v : f.pixels()) v = static_cast<float>(rng.uniform01());
    out.push_back(std::move(f));
  }
  return out;
}

Checkpoint small_checkpoint(std::uint64_t seed) {
  CmscConfig c = CmscConfig::desk();
  c.n_levels = 2;
  c.patch = 8;
  c.context = 24;
  c.filters = {4, 6, 8, 6, 4};
  SeededRng rng(seed);
  return Checkpoint{build_model(c, rng), 17, "scratch"};
}

}  // namespace

TEST_CASE("bseq round trips") {
  const auto frames = random_frames(3, 5, 7, 1);
  const auto bytes = write_bseq(frames, BseqDtype::kF32);
  CHECK(bytes.size() == kBseqHeaderSize + 3 * 5 * 7 * 4);
  CHECK(read_bseq(bytes) == frames);

  const auto ten = random_frames(10, 96, 96, 2);
  CHECK(write_bseq(ten, BseqDtype::kF32).size() == 18 + 10 * 96 * 96 * 4);

  std::vector<BoundaryImage> binary(2, BoundaryImage(4, 4));
  binary[1].at(2, 3) = 1.0f;
  const auto u8 = write_bseq(binary, BseqDtype::kU8);
  CHECK(u8.size() == kBseqHeaderSize + 2 * 16);
  CHECK(read_bseq(u8) == binary);

  CHECK(read_bseq(write_bseq(std::vector<BoundaryImage>{}, BseqDtype::kF32)).empty());
}

TEST_CASE("bseq corruption is a decode error") {
  const auto bytes = write_bseq(random_frames(2, 4, 4, 3), BseqDtype::kF32);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 1);
  CHECK_THROWS_AS(read_bseq(truncated), DecodeError);
  CHECK_THROWS_AS(read_bseq(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)),
                  DecodeError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(read_bseq(magic), DecodeError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(read_bseq(version), DecodeError);
  auto dtype = bytes;
  dtype[17] = 7;
  CHECK_THROWS_AS(read_bseq(dtype), DecodeError);
  auto nan = bytes;
  const float bad = std::nanf("");
  std::memcpy(nan.data() + kBseqHeaderSize, &bad, 4);
  CHECK_THROWS_AS(read_bseq(nan), DecodeError);

  // Random byte flips never crash: they decode or throw DecodeError.
  SeededRng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto b = bytes;
    b[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(b.size()) - 1))] ^=
        static_cast<std::uint8_t>(rng.uniform_int(1, 255));
    try {
      read_bseq(b);
    } catch (const DecodeError&) {
    }
  }
  CHECK_THROWS_AS(load_bseq("/nonexistent/dir/x.bseq"), IoError);
}

TEST_CASE("checkpoint round trip") {
  const Checkpoint c = small_checkpoint(4);
  const auto bytes = save_checkpoint(c);
  const Checkpoint back = load_checkpoint(bytes);
  CHECK(back.model.config == c.model.config);
  CHECK(back.step == 17);
  CHECK(back.lineage == "scratch");
  REQUIRE(back.model.params.size() == c.model.params.size());
  for (std::size_t i = 0; i < c.model.params.size(); ++i) {
    CHECK(back.model.params[i].name == c.model.params[i].name);
    CHECK(back.model.params[i].value == c.model.params[i].value);
  }
  CHECK(save_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint corruption and mismatches") {
  const auto bytes = save_checkpoint(small_checkpoint(5));
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(load_checkpoint(truncated), DecodeError);
  auto magic = bytes;
  magic[3] = 'Z';
  CHECK_THROWS_AS(load_checkpoint(magic), DecodeError);
  auto header = bytes;
  header[8] = 0xff;
  header[9] = 0xff;
  CHECK_THROWS_AS(load_checkpoint(header), DecodeError);
  SeededRng rng(6);
  for (int i = 0; i < 300; ++i) {
    auto b = bytes;
    b[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(b.size()) - 1))] ^=
        static_cast<std::uint8_t>(rng.uniform_int(1, 255));
    try {
      load_checkpoint(b);
    } catch (const Error&) {
    }
  }

  Checkpoint donor = small_checkpoint(7);
  Checkpoint target = small_checkpoint(8);
  load_weights(target.model, donor.model);
  for (std::size_t i = 0; i < donor.model.params.size(); ++i) {
    CHECK(target.model.params[i].value == donor.model.params[i].value);
  }
  CmscConfig wider = donor.model.config;
  wider.filters = {5, 6, 8, 6, 4};
  SeededRng r(1);
  Model other = build_model(wider, r);
  try {
    load_weights(other, donor.model);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("L12.c1.weight") != std::string::npos);
  }
}

TEST_CASE("checkpoint lineage stays on one line") {
  Checkpoint c = small_checkpoint(9);
  c.lineage = "a\nb#c";
  CHECK(load_checkpoint(save_checkpoint(c)).lineage == "a_b_c");
}

TEST_CASE("patch samples") {
  const PatchGeometry geo{32, 96, 4};
  const auto frames = random_frames(7, 96, 96, 10);
  CHECK(count_patch_samples(frames, geo) == (7 - 4) * 9u);
  const auto samples = extract_patch_samples(frames, geo);
  CHECK(samples.size() == (7 - 4) * 9u);
  CHECK(count_patch_samples(std::span(frames).first(4), geo) == 0);

  // Enumeration oracle over lengths and sides.
  for (int len = 1; len < 9; ++len) {
    for (int side : {32, 64, 128}) {
      const auto f = random_frames(len, side, side, 11);
      std::size_t want = 0;
      for (int t = 3; t + 1 < len; ++t) want += static_cast<std::size_t>((side / 32) * (side / 32));
      CHECK(count_patch_samples(f, geo) == want);
    }
  }

  // Corner cell: 5 of the 9 context blocks fall outside the image.
  const std::vector<BoundaryImage> ones(5, BoundaryImage(96, 96, 1.0f));
  const auto corner = extract_patch_samples(ones, geo);
  const PatchSample& s = corner.front();
  CHECK(s.row == 0);
  CHECK(s.col == 0);
  std::size_t zeros = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) zeros += s.context.at(0, y, x) == 0.0f;
  CHECK(zeros == 96u * 96u * 5u / 9u);

  // Context and target contents match the frames.
  const PatchSample& mid = samples[4];  // t = 3, cell (1, 1)
  CHECK(mid.frame == 3);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) CHECK(mid.context.at(3, y, x) == frames[3].at(y, x));
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(mid.target.at(0, y, x) == frames[4].at(32 + y, 32 + x));

  CHECK_THROWS_AS(extract_patch_samples(random_frames(5, 90, 90, 1), geo), ShapeError);
}

TEST_CASE("pgm and trails") {
  BoundaryImage a(4, 6), b(4, 6);
  a.at(1, 1) = 1.0f;
  b.at(2, 4) = 0.5f;
  const auto single = encode_trail(std::vector<BoundaryImage>{a});
  CHECK(decode_pgm(single) == a);
  const BoundaryImage both = decode_pgm(encode_trail(std::vector<BoundaryImage>{a, b}));
  CHECK(both.at(1, 1) == 1.0f);
  CHECK(both.at(2, 4) == doctest::Approx(128.0 / 255.0));
  const auto pgm = encode_pgm(a);
  const std::string head(pgm.begin(), pgm.begin() + 11);
  CHECK(head == "P5\n6 4\n255\n");
  CHECK(pgm.size() == 11 + 24);
  auto bad = pgm;
  bad.pop_back();
  CHECK_THROWS_AS(decode_pgm(bad), DecodeError);
  CHECK_THROWS_AS(superimpose(std::vector<BoundaryImage>{}), ShapeError);
}

TEST_CASE("key=value config files") {
  const KeyValues kv = KeyValues::parse("# comment\nepochs = 3\n\nname=a b\nepochs=4\n");
  CHECK(kv.get_int("epochs") == 4);
  CHECK(kv.get("name") == "a b");
  CHECK(kv.get_or("missing", "x") == "x");
  CHECK_THROWS_AS(KeyValues::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(kv.get_int("name"), ConfigError);
  const KeyValues rec = KeyValues::parse_record("file=a.bseq seed=3 side=64");
  CHECK(rec.get_int("side") == 64);
  CHECK(KeyValues::parse(kv.to_text()).get_int("epochs") == 4);
}
