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

#include "dpft/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "dpft/error.hpp"
#include "dpft/network.hpp"

namespace dpft {
namespace {

ContextMatrix gather(const ContextWindowDataset& data, RowIndices rows, TargetVector& targets) {
  ContextMatrix contexts(static_cast<Eigen::Index>(rows.size()), data.contexts.cols());
  targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r < 0 || r >= data.size()) throw InvalidArgument("batch row out of range");
    contexts.row(static_cast<Eigen::Index>(i)) = data.contexts.row(r);
    targets(static_cast<Eigen::Index>(i)) = data.targets(r);
  }
  return contexts;
}

}  // namespace

LanguageModel LanguageModel::zeros(const Architecture& arch) {
  return LanguageModel{arch, ParamVector(ParamLayout(arch))};
}

LanguageModel LanguageModel::initialized(const Architecture& arch, Rng& rng) {
  LanguageModel model = zeros(arch);
  const auto& slots = model.params.layout().slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (s.cols == 1 && s.name.ends_with(".bias")) continue;
    // Embedding columns map a one-hot token (fan_in = vocab) to `embedding` outputs.
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    auto t = model.params.tensor(i);
    for (Eigen::Index j = 0; j < t.size(); ++j) t.data()[j] = rng.uniform(-limit, limit);
  }
  return model;
}

double batch_loss(const LanguageModel& model, const ContextWindowDataset& data, RowIndices rows) {
  if (rows.empty()) throw InvalidArgument("empty batch");
  TargetVector targets;
  const ContextMatrix contexts = gather(data, rows, targets);
  const auto fwd = forward_pass(model.params, model.arch, contexts);
  return example_nll(fwd, targets).mean();
}

double batch_loss(const LanguageModel& model, const ContextWindowDataset& data) {
  if (data.size() == 0) throw InvalidArgument("empty batch");
  NllAccumulator acc;
  acc.add(model, data, 0, data.size());
  return acc.sum / static_cast<double>(acc.count);
}

void NllAccumulator::add(const LanguageModel& model, const ContextWindowDataset& data,
                         Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || end > data.size() || begin > end) throw InvalidArgument("bad row range");
  for (Eigen::Index lo = begin; lo < end; lo += kEvalChunk) {
    const Eigen::Index n = std::min(kEvalChunk, end - lo);
    const auto fwd = forward_pass(model.params, model.arch, data.contexts.middleRows(lo, n));
    const Vector<double> nll = example_nll(fwd, data.targets.segment(lo, n));
    for (Eigen::Index i = 0; i < n; ++i) sum += nll(i);
    count += n;
  }
}

double NllAccumulator::perplexity() const {
  if (count == 0) throw InvalidArgument("perplexity of an empty dataset");
  const double mean = sum / static_cast<double>(count);
  if (!std::isfinite(mean)) return std::numeric_limits<double>::infinity();
  return std::exp(mean);
}

double perplexity(const LanguageModel& model, const ContextWindowDataset& data) {
  if (data.size() == 0) throw InvalidArgument("perplexity of an empty dataset");
  NllAccumulator acc;
  acc.add(model, data, 0, data.size());
  return acc.perplexity();
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "greedy") return DecodeMode::kGreedy;
  if (name == "sample") return DecodeMode::kSample;
  throw InvalidArgument("decode mode must be 'greedy' or 'sample', got '" + std::string(name) + "'");
}

std::vector<TokenId> generate_ids(const LanguageModel& model, std::span<const TokenId> prompt,
                                  const GenerateOptions& options) {
  if (options.length <= 0) throw InvalidArgument("generation length must be positive");
  if (!(options.temperature > 0)) throw InvalidArgument("temperature must be positive");
  const int k = model.arch.context;
  std::deque<TokenId> window(static_cast<std::size_t>(k), kPad);
  for (TokenId id : prompt) {
    window.pop_front();
    window.push_back(id);
  }

  Rng rng(options.seed);
  std::vector<TokenId> out;
  out.reserve(static_cast<std::size_t>(options.length));
  std::vector<TokenId> context(static_cast<std::size_t>(k));
  for (int step = 0; step < options.length; ++step) {
    std::copy(window.begin(), window.end(), context.begin());
    Vector<double> p = forward(model.params, context, model.arch);
    p(kPad) = 0.0;
    if (!(p.sum() > 0) || !p.allFinite()) {
      throw DivergenceError("model produced no valid next-token distribution");
    }
    TokenId next = kUnk;
    if (options.mode == DecodeMode::kGreedy) {
      Eigen::Index best = 0;
      p.maxCoeff(&best);  // first maximum wins ties
      next = static_cast<TokenId>(best);
    } else {
      if (options.temperature != 1.0) p = p.array().pow(1.0 / options.temperature).matrix();
      const double total = p.sum();
      const double u = rng.uniform() * total;
      double cumulative = 0.0;
      next = static_cast<TokenId>(p.size() - 1);
      for (Eigen::Index v = 1; v < p.size(); ++v) {
        cumulative += p(v);
        if (u < cumulative) {
          next = static_cast<TokenId>(v);
          break;
        }
      }
      while (next > 0 && p(next) == 0.0) --next;
    }
    out.push_back(next);
    window.pop_front();
    window.push_back(next);
  }
  return out;
}

std::string generate(const LanguageModel& model, const Vocabulary& vocab, std::string_view prompt,
                     const GenerateOptions& options) {
  if (vocab.size() != model.arch.vocab) {
    throw ShapeError("vocabulary size " + std::to_string(vocab.size()) +
                     " does not match model vocabulary " + std::to_string(model.arch.vocab));
  }
  Sentence ids = encode(prompt, vocab);
  ids.pop_back();  // the prompt is a prefix, not a finished sentence
  const auto generated = generate_ids(model, ids, options);
  std::string text;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (i) text += ' ';
    text += vocab.token(generated[i]);
  }
  return text;
}

}  // namespace dpft
