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

#include "cmsc/keyvalue.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmsc/error.hpp"

namespace cmsc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void add_pair(std::vector<std::pair<std::string, std::string>>& out, std::string_view item,
              std::size_t line_no) {
  const auto eq = item.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                      std::string(item) + "'");
  }
  out.emplace_back(std::string(trim(item.substr(0, eq))),
                   std::string(trim(item.substr(eq + 1))));
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    add_pair(kv.entries_, line, line_no);
  }
  return kv;
}

KeyValues KeyValues::parse_record(std::string_view line) {
  KeyValues kv;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto b = line.find_first_not_of(" \t\r\n", pos);
    if (b == std::string_view::npos) break;
    auto e = line.find_first_of(" \t\r\n", b);
    if (e == std::string_view::npos) e = line.size();
    add_pair(kv.entries_, line.substr(b, e - b), 1);
    pos = e;
  }
  return kv;
}

KeyValues KeyValues::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValues::has(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& KeyValues::get(std::string_view key) const {
  // Last assignment wins.
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  throw ConfigError("missing key '" + std::string(key) + "'");
}

std::string KeyValues::get_or(std::string_view key, std::string fallback) const {
  return has(key) ? get(key) : fallback;
}

long long KeyValues::get_int(std::string_view key) const {
  const std::string& s = get(key);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("key '" + std::string(key) + "': not an integer: '" + s + "'");
  }
  return v;
}

long long KeyValues::get_int_or(std::string_view key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KeyValues::get_double(std::string_view key) const {
  const std::string& s = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + std::string(key) + "': not a number: '" + s + "'");
  }
}

double KeyValues::get_double_or(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KeyValues::get_bool_or(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = get(key);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + std::string(key) + "': not a boolean: '" + s + "'");
}

std::vector<int> KeyValues::get_int_list(std::string_view key) const {
  const std::string& s = get(key);
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string_view item = trim(std::string_view(s).substr(pos, comma - pos));
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw ConfigError("key '" + std::string(key) + "': bad integer list '" + s + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

void KeyValues::set(std::string_view key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::string(key), std::move(value));
}

void KeyValues::set(std::string_view key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  set(key, std::string(buf));
}

std::string KeyValues::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string KeyValues::to_record() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

}  // namespace cmsc
