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

// Corpus ingestion: shared vocabulary, sentence encoding and fixed-length
// context windows.

#ifndef DPFT_CORPUS_HPP_
#define DPFT_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace dpft {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kBos = 2;
inline constexpr TokenId kEos = 3;
inline constexpr int kNumSpecials = 4;
inline constexpr std::array<std::string_view, kNumSpecials> kSpecialTokens = {
    "<pad>", "<unk>", "<bos>", "<eos>"};

inline constexpr int kDefaultMinCount = 2;
inline constexpr int kDefaultContext = 20;

// Bidirectional token <-> id map. Ids are contiguous in [0, size()) and the
// four specials occupy ids 0-3.
class Vocabulary {
 public:
  // Vocabulary holding only the specials.
  Vocabulary();
  // `words` must be distinct, non-special, whitespace-free tokens; they
  // receive ids 4, 5, ... in the given order.
  explicit Vocabulary(std::vector<std::string> words);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(TokenId id) const;
  // kUnk for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Encoded sentence; always terminated by kEos.
using Sentence = std::vector<TokenId>;

using ContextMatrix = Eigen::Matrix<TokenId, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using TargetVector = Eigen::Matrix<TokenId, Eigen::Dynamic, 1>;

// Supervised (k previous ids -> next id) pairs. Rows of one sentence are
// contiguous; sentence s owns rows [sentence_offsets[s], sentence_offsets[s+1]).
struct ContextWindowDataset {
  ContextMatrix contexts;
  TargetVector targets;
  std::vector<Eigen::Index> sentence_offsets{0};

  Eigen::Index size() const { return targets.size(); }
  int context_length() const { return static_cast<int>(contexts.cols()); }
  std::size_t sentence_count() const { return sentence_offsets.size() - 1; }
};

struct SplitFractions {
  double train = 1.0;
  double dev = 0.0;
  double test = 0.0;
};

struct DatasetSplits {
  ContextWindowDataset train;
  ContextWindowDataset dev;
  ContextWindowDataset test;
};

// Lowercased whitespace tokens of one line.
std::vector<std::string> tokenize(std::string_view line);

// Reads one sentence per line. Throws IoError naming the source and line on
// stream failure or invalid UTF-8.
std::vector<std::string> read_lines(std::istream& in, std::string_view source = "<stream>");
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Tokens with count >= min_count over both corpora, ordered by descending
// count then lexicographically, after the four specials.
Vocabulary build_vocabulary(std::span<const std::string> public_lines,
                            std::span<const std::string> private_lines, int min_count);
Vocabulary build_vocabulary(std::istream& public_corpus, std::istream& private_corpus,
                            int min_count);

Sentence encode(std::string_view line, const Vocabulary& vocab);
std::vector<Sentence> encode_all(std::span<const std::string> lines, const Vocabulary& vocab);
// Space-joined surface tokens; a trailing EOS is dropped.
std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab);

ContextWindowDataset windows(std::span<const Sentence> sentences, int k);

// Sentence-granular split. Dev and test receive floor(fraction * n)
// sentences, train gets the remainder.
DatasetSplits split(const ContextWindowDataset& dataset, const SplitFractions& fractions,
                    std::uint64_t seed);

// Dataset made of the listed sentences, in the given order.
ContextWindowDataset select_sentences(const ContextWindowDataset& dataset,
                                      std::span<const std::size_t> sentences);

// One token per line, line number = id.
void write_vocabulary(const Vocabulary& vocab, std::ostream& out);
void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocabulary(std::istream& in);
Vocabulary read_vocabulary(const std::filesystem::path& path);

}  // namespace dpft

#endif  // DPFT_CORPUS_HPP_
