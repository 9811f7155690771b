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

#include "dpft/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dpft/error.hpp"
#include "dpft/rng.hpp"

namespace dpft {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Returns the byte offset of the first malformed sequence, or npos.
std::size_t first_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      return i;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size() && extra > 0) return i;
    for (int j = 1; j <= extra; ++j) {
      if ((static_cast<unsigned char>(s[i + j]) & 0xC0) != 0x80) return i;
    }
    i += extra + 1;
  }
  return std::string_view::npos;
}

bool is_special(std::string_view token) {
  return std::find(kSpecialTokens.begin(), kSpecialTokens.end(), token) != kSpecialTokens.end();
}

void count_tokens(std::span<const std::string> lines, std::map<std::string, long>& counts,
                  long& total) {
  for (const auto& line : lines) {
    for (auto& token : tokenize(line)) {
      if (is_special(token)) continue;
      ++counts[std::move(token)];
      ++total;
    }
  }
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) {
  tokens_.reserve(words.size() + kNumSpecials);
  for (auto special : kSpecialTokens) tokens_.emplace_back(special);
  for (auto& w : words) {
    if (w.empty() || is_special(w) ||
        std::any_of(w.begin(), w.end(), [](char c) { return is_space(c); })) {
      throw InvalidArgument("invalid vocabulary token '" + w + "'");
    }
    tokens_.push_back(std::move(w));
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside [0, " +
                          std::to_string(size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) {
      std::string token(line.substr(i, j - i));
      std::transform(token.begin(), token.end(), token.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      });
      out.push_back(std::move(token));
    }
    i = j;
  }
  return out;
}

std::vector<std::string> read_lines(std::istream& in, std::string_view source) {
  std::vector<std::string> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto bad = first_invalid_utf8(line); bad != std::string_view::npos) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ":" +
                    std::to_string(bad + 1) + ": invalid UTF-8");
    }
    lines.push_back(std::move(line));
  }
  if (in.bad()) {
    throw IoError(std::string(source) + ":" + std::to_string(line_no + 1) + ": read error");
  }
  return lines;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ":0: cannot open");
  return read_lines(in, path.string());
}

Vocabulary build_vocabulary(std::span<const std::string> public_lines,
                            std::span<const std::string> private_lines, int min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be positive");
  std::map<std::string, long> counts;
  long total = 0;
  count_tokens(public_lines, counts, total);
  count_tokens(private_lines, counts, total);
  if (total == 0) throw InvalidArgument("empty corpus");

  std::vector<std::pair<std::string, long>> kept;
  for (auto& [token, n] : counts) {
    if (n >= min_count) kept.emplace_back(token, n);
  }
  // `counts` is already lexicographic, so a stable sort on count is enough.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [token, n] : kept) words.push_back(std::move(token));
  return Vocabulary(std::move(words));
}

Vocabulary build_vocabulary(std::istream& public_corpus, std::istream& private_corpus,
                            int min_count) {
  const auto pub = read_lines(public_corpus, "<public>");
  const auto priv = read_lines(private_corpus, "<private>");
  return build_vocabulary(pub, priv, min_count);
}

Sentence encode(std::string_view line, const Vocabulary& vocab) {
  Sentence out;
  for (const auto& token : tokenize(line)) {
    // Literal special markers in text are treated as unknown words.
    out.push_back(is_special(token) ? kUnk : vocab.id(token));
  }
  out.push_back(kEos);
  return out;
}

std::vector<Sentence> encode_all(std::span<const std::string> lines, const Vocabulary& vocab) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(encode(line, vocab));
  return out;
}

std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  if (!ids.empty() && ids.back() == kEos) ids = ids.first(ids.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(ids[i]);
  }
  return out;
}

ContextWindowDataset windows(std::span<const Sentence> sentences, int k) {
  if (k <= 0) throw InvalidArgument("context length must be positive");
  Eigen::Index n = 0;
  for (const auto& s : sentences) n += static_cast<Eigen::Index>(s.size());

  ContextWindowDataset out;
  out.contexts = ContextMatrix::Constant(n, k, kPad);
  out.targets.resize(n);
  out.sentence_offsets.reserve(sentences.size() + 1);
  Eigen::Index row = 0;
  for (const auto& s : sentences) {
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
      if (s[pos] == kPad) throw InvalidArgument("sentence contains PAD");
      // Context column k-1 holds the most recent token.
      const auto history = static_cast<int>(std::min<std::size_t>(pos, static_cast<std::size_t>(k)));
      for (int h = 1; h <= history; ++h) out.contexts(row, k - h) = s[pos - static_cast<std::size_t>(h)];
      out.targets(row) = s[pos];
      ++row;
    }
    out.sentence_offsets.push_back(row);
  }
  return out;
}

ContextWindowDataset select_sentences(const ContextWindowDataset& dataset,
                                      std::span<const std::size_t> sentences) {
  Eigen::Index n = 0;
  for (auto s : sentences) {
    if (s >= dataset.sentence_count()) throw InvalidArgument("sentence index out of range");
    n += dataset.sentence_offsets[s + 1] - dataset.sentence_offsets[s];
  }
  ContextWindowDataset out;
  out.contexts.resize(n, dataset.contexts.cols());
  out.targets.resize(n);
  out.sentence_offsets.reserve(sentences.size() + 1);
  Eigen::Index row = 0;
  for (auto s : sentences) {
    const auto begin = dataset.sentence_offsets[s];
    const auto len = dataset.sentence_offsets[s + 1] - begin;
    out.contexts.middleRows(row, len) = dataset.contexts.middleRows(begin, len);
    out.targets.segment(row, len) = dataset.targets.segment(begin, len);
    row += len;
    out.sentence_offsets.push_back(row);
  }
  return out;
}

DatasetSplits split(const ContextWindowDataset& dataset, const SplitFractions& fractions,
                    std::uint64_t seed) {
  const double sum = fractions.train + fractions.dev + fractions.test;
  if (!(fractions.train >= 0 && fractions.dev >= 0 && fractions.test >= 0) ||
      !(std::abs(sum - 1.0) <= 1e-9)) {
    throw InvalidArgument("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = dataset.sentence_count();
  const auto n_dev = static_cast<std::size_t>(std::floor(fractions.dev * static_cast<double>(n) + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n) + 1e-9));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> picked(order.begin() + static_cast<std::ptrdiff_t>(from),
                                    order.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(picked.begin(), picked.end());
    return select_sentences(dataset, picked);
  };
  const std::size_t n_train = n - n_dev - n_test;
  return DatasetSplits{take(0, n_train), take(n_train, n_dev), take(n_train + n_dev, n_test)};
}

void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  for (const auto& token : vocab.tokens()) out << token << '\n';
  if (!out) throw IoError("failed to write vocabulary");
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ":0: cannot open for writing");
  write_vocabulary(vocab, out);
}

Vocabulary read_vocabulary(std::istream& in) {
  auto lines = read_lines(in, "<vocabulary>");
  if (lines.size() < static_cast<std::size_t>(kNumSpecials)) {
    throw IoError("vocabulary: fewer than " + std::to_string(kNumSpecials) + " lines");
  }
  for (int i = 0; i < kNumSpecials; ++i) {
    if (lines[static_cast<std::size_t>(i)] != kSpecialTokens[static_cast<std::size_t>(i)]) {
      throw IoError("vocabulary:" + std::to_string(i + 1) + ": expected special token " +
                    std::string(kSpecialTokens[static_cast<std::size_t>(i)]));
    }
  }
  return Vocabulary(std::vector<std::string>(lines.begin() + kNumSpecials, lines.end()));
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ":0: cannot open");
  return read_vocabulary(in);
}

}  // namespace dpft
