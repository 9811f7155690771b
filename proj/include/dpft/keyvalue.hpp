// Copyright 2026 The dpft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat "key=value" text files with dotted section prefixes, plus the number
// formatting shared by every text output.

#ifndef DPFT_KEYVALUE_HPP_
#define DPFT_KEYVALUE_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dpft {

// Shortest decimal string that parses back to the same double ("inf",
// "-inf" and "nan" for non-finite values).
std::string format_double(double value);

double parse_double_value(std::string_view text, std::string_view what);
int parse_int_value(std::string_view text, std::string_view what);
long long parse_int64_value(std::string_view text, std::string_view what);
bool parse_bool_value(std::string_view text, std::string_view what);

std::vector<std::string> split_list(std::string_view text, char separator);

// Ordered key=value document. Blank lines and lines starting with '#' are
// ignored on read; keys are unique.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, std::string_view source);
  static KeyValueFile load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool contains(std::string_view key) const;
  // Throws InvalidArgument naming the key when absent.
  const std::string& get(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace dpft

#endif  // DPFT_KEYVALUE_HPP_
