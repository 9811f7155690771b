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

#include "dpft/params.hpp"

#include <sstream>

namespace dpft {

Architecture Architecture::preset(std::string_view name, int vocab) {
  Architecture arch;
  arch.context = 20;
  arch.embedding = kDefaultEmbedding;
  arch.vocab = vocab;
  if (name == "small") {
    arch.hidden = {500, 250, 50};
  } else if (name == "large") {
    arch.hidden = {10000, 5000, 1000};
  } else {
    throw InvalidArgument("unknown architecture preset '" + std::string(name) + "'");
  }
  return arch;
}

void Architecture::validate() const {
  if (context <= 0) throw InvalidArgument("context length must be positive");
  if (embedding <= 0) throw InvalidArgument("embedding dimension must be positive");
  if (vocab <= 0) throw InvalidArgument("vocabulary size must be positive");
  if (hidden.empty()) throw InvalidArgument("architecture needs at least one hidden layer");
  for (int h : hidden) {
    if (h <= 0) throw InvalidArgument("hidden sizes must be positive");
  }
}

std::string to_string(const Architecture& arch) {
  std::ostringstream os;
  os << "context=" << arch.context << " embedding=" << arch.embedding << " hidden=";
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) os << (i ? "," : "") << arch.hidden[i];
  os << " vocab=" << arch.vocab;
  return os.str();
}

ParamLayout::ParamLayout(const Architecture& arch) {
  arch.validate();
  auto add = [this](std::string name, Eigen::Index rows, Eigen::Index cols) {
    slots_.push_back(TensorSlot{std::move(name), rows, cols, total_});
    total_ += rows * cols;
  };
  add("embedding", arch.embedding, arch.vocab);
  Eigen::Index fan_in = arch.input_width();
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    const std::string prefix = "dense" + std::to_string(i);
    add(prefix + ".weight", arch.hidden[i], fan_in);
    add(prefix + ".bias", arch.hidden[i], 1);
    fan_in = arch.hidden[i];
  }
  add("output.weight", arch.vocab, fan_in);
  add("output.bias", arch.vocab, 1);
}

const TensorSlot& ParamLayout::find(std::string_view name) const {
  for (const auto& s : slots_) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("no tensor named '" + std::string(name) + "'");
}

void check_layout(const ParamLayout& actual, const Architecture& arch) {
  const ParamLayout expected(arch);
  if (actual == expected) return;
  auto describe = [](const ParamLayout& layout) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < layout.slots().size(); ++i) {
      const auto& s = layout.slot(i);
      os << (i ? ", " : "") << s.name << " " << s.rows << "x" << s.cols;
    }
    os << "] total=" << layout.total();
    return os.str();
  };
  throw ShapeError("parameter layout mismatch: expected " + describe(expected) + ", got " +
                   describe(actual));
}

}  // namespace dpft
