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

#include "dpft/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dpft/error.hpp"

namespace dpft {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument(std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double_value(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

int parse_int_value(std::string_view text, std::string_view what) {
  return parse_integer<int>(text, what);
}

long long parse_int64_value(std::string_view text, std::string_view what) {
  return parse_integer<long long>(text, what);
}

bool parse_bool_value(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidArgument(std::string(what) + ": expected true/false, got '" + std::string(text) + "'");
}

std::vector<std::string> split_list(std::string_view text, char separator) {
  std::vector<std::string> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(separator, start);
    out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string_view source) {
  KeyValueFile file;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    if (file.contains(key)) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    file.set(key, std::string(trim(body.substr(eq + 1))));
  }
  if (in.bad()) throw IoError(std::string(source) + ":" + std::to_string(line_no + 1) + ": read error");
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ":0: cannot open");
  return parse(in, path.string());
}

void KeyValueFile::set(const std::string& key, std::string value) {
  if (auto it = index_.find(key); it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  index_.emplace(key, entries_.size());
  entries_.emplace_back(key, std::move(value));
}

bool KeyValueFile::contains(std::string_view key) const { return index_.find(key) != index_.end(); }

const std::string& KeyValueFile::get(std::string_view key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw InvalidArgument("missing key '" + std::string(key) + "'");
  return entries_[it->second].second;
}

std::optional<std::string> KeyValueFile::find(std::string_view key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].second;
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& [key, value] : entries_) out << key << '=' << value << '\n';
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  write(out);
  if (!out) throw IoError(path.string() + ": write failed");
}

std::string KeyValueFile::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace dpft
