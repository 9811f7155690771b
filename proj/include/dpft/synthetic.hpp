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

// Toy corpus pairs for smoke runs: a "public" and a "private" first-order
// Markov source over one shared word list. The private source keeps part of
// every word's successor list and redraws the rest, so the corpora share
// vocabulary and unigram shape but differ in bigram statistics.

#ifndef DPFT_SYNTHETIC_HPP_
#define DPFT_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace dpft {

struct SyntheticOptions {
  int words = 496;
  int public_sentences = 1000;
  int private_sentences = 300;
  int successors = 6;
  // Leading successors of each word that the private source redraws.
  int shifted_successors = 3;
  int min_length = 6;
  int max_length = 16;
  std::uint64_t seed = 1;
};

struct SyntheticCorpora {
  std::vector<std::string> public_lines;
  std::vector<std::string> private_lines;
};

SyntheticCorpora make_synthetic_corpora(const SyntheticOptions& options);

}  // namespace dpft

#endif  // DPFT_SYNTHETIC_HPP_
