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

#ifndef DPFT_MODEL_HPP_
#define DPFT_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "dpft/corpus.hpp"
#include "dpft/params.hpp"
#include "dpft/rng.hpp"

namespace dpft {

struct LanguageModel {
  Architecture arch;
  ParamVector params;

  // All-zero parameters: the uniform model.
  static LanguageModel zeros(const Architecture& arch);
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static LanguageModel initialized(const Architecture& arch, Rng& rng);

  bool operator==(const LanguageModel&) const = default;
};

// Rows of a dataset forming one batch.
using RowIndices = std::span<const Eigen::Index>;

// Mean -log p(target | context) over the rows; throws on an empty batch.
double batch_loss(const LanguageModel& model, const ContextWindowDataset& data, RowIndices rows);
double batch_loss(const LanguageModel& model, const ContextWindowDataset& data);

// Running sum of per-example negative log-likelihood, for evaluation in
// chunks. Sums are taken chunk by chunk in row order.
struct NllAccumulator {
  double sum = 0.0;
  Eigen::Index count = 0;

  void add(const LanguageModel& model, const ContextWindowDataset& data, Eigen::Index begin,
           Eigen::Index end);
  // exp(sum / count); +infinity when the mean is not finite.
  double perplexity() const;
};

inline constexpr Eigen::Index kEvalChunk = 512;

// exp(mean NLL) over every example; +infinity for a diverged model.
double perplexity(const LanguageModel& model, const ContextWindowDataset& data);

enum class DecodeMode { kGreedy, kSample };

DecodeMode parse_decode_mode(std::string_view name);

struct GenerateOptions {
  int length = 10;
  DecodeMode mode = DecodeMode::kSample;
  std::uint64_t seed = 0;
  double temperature = 1.0;
};

// Emits exactly `length` tokens from the rolling context window started by
// the prompt. PAD is never produced; EOS does not stop emission.
std::vector<TokenId> generate_ids(const LanguageModel& model, std::span<const TokenId> prompt,
                                  const GenerateOptions& options);
std::string generate(const LanguageModel& model, const Vocabulary& vocab, std::string_view prompt,
                     const GenerateOptions& options);

// Header of "key=value" lines describing the architecture, a "---" line, then
// the raw little-endian doubles in layout order.
void save_checkpoint(const LanguageModel& model, std::ostream& out);
void save_checkpoint(const LanguageModel& model, const std::filesystem::path& path);
LanguageModel load_checkpoint(std::istream& in);
LanguageModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dpft

#endif  // DPFT_MODEL_HPP_
