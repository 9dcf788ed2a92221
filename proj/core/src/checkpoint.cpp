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

#include "cmsc/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "cmsc/bseq.hpp"

namespace cmsc::io {

namespace {

constexpr char kMagic[8] = {'C', 'M', 'S', 'C', 'K', 'P', 'T', '1'};

std::string dims_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out;
}

struct ParamEntry {
  std::string name;
  Shape shape;
  std::uint64_t offset = 0;
};

ParamEntry parse_param_line(const std::string& value) {
  ParamEntry e;
  const auto s1 = value.find(' ');
  const auto s2 = value.find(' ', s1 == std::string::npos ? s1 : s1 + 1);
  if (s1 == std::string::npos || s2 == std::string::npos) {
    throw DecodeError("checkpoint: malformed param entry '" + value + "'");
  }
  e.name = value.substr(0, s1);
  const std::string dims = value.substr(s1 + 1, s2 - s1 - 1);
  try {
    std::size_t pos = 0;
    while (pos < dims.size()) {
      auto comma = dims.find(',', pos);
      if (comma == std::string::npos) comma = dims.size();
      std::size_t used = 0;
      const std::string item = dims.substr(pos, comma - pos);
      const long d = std::stol(item, &used);
      if (used != item.size() || d < 0 || d > (1 << 20)) throw std::invalid_argument(item);
      e.shape.push_back(static_cast<int>(d));
      pos = comma + 1;
    }
    std::size_t used = 0;
    const std::string off = value.substr(s2 + 1);
    e.offset = std::stoull(off, &used);
    if (used != off.size()) throw std::invalid_argument(off);
  } catch (const std::exception&) {
    throw DecodeError("checkpoint: malformed param entry '" + value + "'");
  }
  if (e.shape.empty()) throw DecodeError("checkpoint: param '" + e.name + "' has no shape");
  return e;
}

}  // namespace

std::vector<std::uint8_t> save_checkpoint(const Checkpoint& ckpt) {
  KeyValues header = ckpt.model.config.to_kv();
  header.set("step", static_cast<long long>(ckpt.step));
  std::string lineage = ckpt.lineage.empty() ? std::string("-") : ckpt.lineage;
  std::replace_if(
      lineage.begin(), lineage.end(), [](char c) { return c == '\n' || c == '\r' || c == '#'; },
      '_');
  header.set("lineage", lineage);
  std::string text = header.to_text();
  std::uint64_t offset = 0;
  for (const auto& p : ckpt.model.params) {
    if (p.name.find_first_of(" \n=") != std::string::npos) {
      throw ConfigError("checkpoint: parameter name '" + p.name + "' is not serialisable");
    }
    text += "param=" + p.name + " " + dims_string(p.value.shape()) + " " +
            std::to_string(offset) + "\n";
    offset += p.value.size() * 4;
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  le::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& p : ckpt.model.params) {
    for (float v : p.value.data()) le::put_f32(out, v);
  }
  return out;
}

Checkpoint load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw DecodeError("checkpoint: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw DecodeError("checkpoint: bad magic");
  const std::uint64_t header_len = le::get_u32(bytes.data() + 8);
  if (header_len > bytes.size() - 12) throw DecodeError("checkpoint: header runs past end of file");
  const std::string text(reinterpret_cast<const char*>(bytes.data() + 12), header_len);
  const auto payload = bytes.subspan(12 + header_len);

  KeyValues kv;
  try {
    kv = KeyValues::parse(text);
  } catch (const ConfigError& e) {
    throw DecodeError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.model.config = CmscConfig::from_kv(kv);
    ckpt.model.config.validate();
    ckpt.step = kv.get_int_or("step", 0);
  } catch (const ConfigError& e) {
    throw DecodeError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  ckpt.lineage = kv.get_or("lineage", "-");
  if (ckpt.lineage == "-") ckpt.lineage.clear();

  std::vector<ParamEntry> entries;
  for (const auto& [k, v] : kv.entries()) {
    if (k == "param") entries.push_back(parse_param_line(v));
  }
  // Offsets must tile the payload exactly, in order, with no overlap.
  std::uint64_t expect = 0;
  for (const auto& e : entries) {
    if (e.offset != expect) {
      throw DecodeError("checkpoint: param '" + e.name + "' offset " + std::to_string(e.offset) +
                        " overlaps or leaves a gap (expected " + std::to_string(expect) + ")");
    }
    expect += shape_size(e.shape) * 4;
    if (expect > payload.size()) {
      throw DecodeError("checkpoint: param '" + e.name + "' extends past the payload");
    }
  }
  if (expect != payload.size()) {
    throw DecodeError("checkpoint: payload has " + std::to_string(payload.size()) +
                      " bytes, header accounts for " + std::to_string(expect));
  }
  for (const auto& e : entries) {
    Tensor t(e.shape);
    const std::uint8_t* p = payload.data() + e.offset;
    for (float& v : t.data()) {
      v = le::get_f32(p);
      p += 4;
    }
    if (!t.all_finite()) throw DecodeError("checkpoint: param '" + e.name + "' is not finite");
    ckpt.model.params.emplace_back(e.name, std::move(t));
  }
  return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
  write_file(path, save_checkpoint(ckpt));
}

Checkpoint load_checkpoint_file(const std::string& path) {
  return load_checkpoint(read_file(path));
}

void load_weights(Model& target, const Model& source) {
  for (std::size_t i = 0; i < target.params.size(); ++i) {
    const auto& want = target.params[i];
    if (i >= source.params.size()) {
      throw ShapeError("load_weights: source lacks parameter '" + want.name + "'");
    }
    const auto& have = source.params[i];
    if (have.name != want.name || have.value.shape() != want.value.shape()) {
      throw ShapeError("load_weights: parameter '" + want.name + "' expects " +
                       shape_string(want.value.shape()) + " but checkpoint has '" + have.name +
                       "' " + shape_string(have.value.shape()));
    }
  }
  if (source.params.size() != target.params.size()) {
    throw ShapeError("load_weights: checkpoint has extra parameter '" +
                     source.params[target.params.size()].name + "'");
  }
  for (std::size_t i = 0; i < target.params.size(); ++i) {
    target.params[i].value = source.params[i].value;
    target.params[i].zero_grad();
  }
}

}  // namespace cmsc::io
