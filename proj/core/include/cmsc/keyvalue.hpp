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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cmsc {

/// Ordered key=value store used for config files, checkpoint headers and
/// dataset manifests.
///
/// Text form: one `key=value` per line, blank lines and `#` comments ignored.
/// Record form: whitespace-separated `key=value` tokens on a single line.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues parse_record(std::string_view line);
  static KeyValues load_file(const std::string& path);

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  long long get_int(std::string_view key) const;
  long long get_int_or(std::string_view key, long long fallback) const;
  double get_double(std::string_view key) const;
  double get_double_or(std::string_view key, double fallback) const;
  bool get_bool_or(std::string_view key, bool fallback) const;
  std::vector<int> get_int_list(std::string_view key) const;

  void set(std::string_view key, std::string value);
  void set(std::string_view key, long long value) { set(key, std::to_string(value)); }
  void set(std::string_view key, int value) { set(key, std::to_string(value)); }
  void set(std::string_view key, double value);
  void set_bool(std::string_view key, bool value) { set(key, std::string(value ? "1" : "0")); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_text() const;
  std::string to_record() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace cmsc
