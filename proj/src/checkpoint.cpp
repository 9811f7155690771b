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

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dpft/error.hpp"
#include "dpft/keyvalue.hpp"
#include "dpft/model.hpp"

namespace dpft {
namespace {

constexpr std::string_view kFormat = "dpft-checkpoint-1";
constexpr std::string_view kSeparator = "---";

static_assert(sizeof(double) == 8);

void to_little_endian(unsigned char* bytes) {
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
}

int parse_int(const std::map<std::string, std::string>& header, const std::string& key) {
  auto it = header.find(key);
  if (it == header.end()) throw IoError("checkpoint header: missing key '" + key + "'");
  return parse_int_value(it->second, "checkpoint header " + key);
}

}  // namespace

void save_checkpoint(const LanguageModel& model, std::ostream& out) {
  check_layout(model.params.layout(), model.arch);
  std::string hidden;
  for (std::size_t i = 0; i < model.arch.hidden.size(); ++i) {
    hidden += (i ? "," : "") + std::to_string(model.arch.hidden[i]);
  }
  out << "format=" << kFormat << '\n'
      << "context=" << model.arch.context << '\n'
      << "embedding=" << model.arch.embedding << '\n'
      << "hidden=" << hidden << '\n'
      << "vocab=" << model.arch.vocab << '\n'
      << "params=" << model.params.size() << '\n'
      << kSeparator << '\n';
  const auto& values = model.params.values();
  std::vector<unsigned char> buffer(static_cast<std::size_t>(values.size()) * 8);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    unsigned char* slot = buffer.data() + static_cast<std::size_t>(i) * 8;
    std::memcpy(slot, &values(i), 8);
    to_little_endian(slot);
  }
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()));
  if (!out) throw IoError("failed to write checkpoint");
}

void save_checkpoint(const LanguageModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  save_checkpoint(model, out);
}

LanguageModel load_checkpoint(std::istream& in) {
  std::map<std::string, std::string> header;
  std::string line;
  int line_no = 0;
  bool terminated = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == kSeparator) {
      terminated = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("checkpoint header:" + std::to_string(line_no) + ": expected key=value");
    }
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!terminated) throw IoError("checkpoint header: missing '---' terminator");
  if (header["format"] != kFormat) throw IoError("checkpoint header: unsupported format");

  Architecture arch;
  arch.context = parse_int(header, "context");
  arch.embedding = parse_int(header, "embedding");
  arch.vocab = parse_int(header, "vocab");
  for (const auto& h : split_list(header["hidden"], ',')) {
    arch.hidden.push_back(parse_int_value(h, "checkpoint header hidden"));
  }
  arch.validate();
  LanguageModel model = LanguageModel::zeros(arch);
  const long long expected = parse_int64_value(header["params"], "checkpoint header params");
  if (expected != model.params.size()) {
    throw ShapeError("checkpoint declares " + std::to_string(expected) +
                     " parameters but the architecture needs " +
                     std::to_string(model.params.size()));
  }
  std::vector<unsigned char> buffer(static_cast<std::size_t>(expected) * 8);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (in.gcount() != static_cast<std::streamsize>(buffer.size())) {
    throw IoError("checkpoint payload truncated at parameter " +
                  std::to_string(in.gcount() / 8));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("checkpoint has trailing bytes");
  auto& values = model.params.values();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    unsigned char* slot = buffer.data() + static_cast<std::size_t>(i) * 8;
    to_little_endian(slot);
    std::memcpy(&values(i), slot, 8);
  }
  return model;
}

LanguageModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  return load_checkpoint(in);
}

}  // namespace dpft
