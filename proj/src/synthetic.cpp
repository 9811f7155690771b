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

#include "dpft/synthetic.hpp"

#include <cmath>

#include "dpft/error.hpp"
#include "dpft/rng.hpp"

namespace dpft {
namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
constexpr int kSyllables = 14 * 5;

std::string word_name(int index) {
  // Two or three syllables, unique per index.
  std::string w;
  int x = index;
  for (int i = 0; i < 2 || x > 0; ++i) {
    const int s = x % kSyllables;
    x /= kSyllables;
    w += kOnsets[s / 5];
    w += kVowels[s % 5];
  }
  return w;
}

// Index drawn from a Zipf(1) law over [0, n).
class ZipfSampler {
 public:
  explicit ZipfSampler(int n) : cdf_(static_cast<std::size_t>(n)) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += 1.0 / (i + 1.0);
      cdf_[static_cast<std::size_t>(i)] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  int operator()(Rng& rng) const {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
      if (u < cdf_[i]) return static_cast<int>(i);
    }
    return static_cast<int>(cdf_.size()) - 1;
  }

 private:
  std::vector<double> cdf_;
};

using Successors = std::vector<std::vector<int>>;

std::vector<std::string> sample_lines(const Successors& next, const ZipfSampler& start,
                                      const std::vector<double>& weights,
                                      const std::vector<std::string>& names, int count,
                                      const SyntheticOptions& options, Rng& rng) {
  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const int length =
        options.min_length +
        static_cast<int>(rng.uniform() * (options.max_length - options.min_length + 1));
    int w = start(rng);
    std::string line = names[static_cast<std::size_t>(w)];
    for (int t = 1; t < length; ++t) {
      double u = rng.uniform();
      std::size_t pick = 0;
      while (pick + 1 < weights.size() && u >= weights[pick]) u -= weights[pick++];
      w = next[static_cast<std::size_t>(w)][pick];
      line += ' ';
      line += names[static_cast<std::size_t>(w)];
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

SyntheticCorpora make_synthetic_corpora(const SyntheticOptions& options) {
  if (options.words < 2 || options.successors < 1 || options.shifted_successors < 0 ||
      options.shifted_successors > options.successors || options.min_length < 1 ||
      options.max_length < options.min_length || options.public_sentences < 0 ||
      options.private_sentences < 0) {
    throw InvalidArgument("invalid synthetic corpus options");
  }
  Rng rng(options.seed);
  std::vector<std::string> names;
  for (int i = 0; i < options.words; ++i) names.push_back(word_name(i));

  const ZipfSampler zipf(options.words);
  Successors pub(static_cast<std::size_t>(options.words));
  for (auto& list : pub) {
    for (int j = 0; j < options.successors; ++j) list.push_back(zipf(rng));
  }
  Successors priv = pub;
  for (auto& list : priv) {
    for (int j = 0; j < options.shifted_successors; ++j) list[static_cast<std::size_t>(j)] = zipf(rng);
  }

  // Geometric successor weights: each option half as likely as the previous.
  std::vector<double> weights;
  double total = 0.0;
  for (int j = 0; j < options.successors; ++j) {
    weights.push_back(std::pow(0.5, j));
    total += weights.back();
  }
  for (auto& w : weights) w /= total;

  SyntheticCorpora out;
  out.public_lines = sample_lines(pub, zipf, weights, names, options.public_sentences, options, rng);
  out.private_lines = sample_lines(priv, zipf, weights, names, options.private_sentences, options, rng);
  return out;
}

}  // namespace dpft
