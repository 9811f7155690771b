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

// End-to-end evaluation schema: public-only and private-only baselines, a
// non-private fine-tune of the public model, and a DP fine-tune of the same
// public checkpoint, all evaluated on the private dev/test split.

#ifndef DPFT_EXPERIMENT_HPP_
#define DPFT_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpft/accountant.hpp"
#include "dpft/corpus.hpp"
#include "dpft/keyvalue.hpp"
#include "dpft/model.hpp"
#include "dpft/optimizer.hpp"

namespace dpft {

inline constexpr const char* kStagePublicOnly = "public_only";
inline constexpr const char* kStagePrivateOnly = "private_only";
inline constexpr const char* kStageFinetune = "finetune";
inline constexpr const char* kStageDpFinetune = "dp_finetune";
inline constexpr const char* kStageDpScratch = "dp_scratch";

struct ExperimentConfig {
  // Paths as written in the file; relative ones resolve against base_dir.
  std::filesystem::path public_corpus;
  std::filesystem::path private_corpus;
  std::filesystem::path output_dir;
  std::filesystem::path base_dir;  // not serialized

  int min_count = kDefaultMinCount;
  int context = kDefaultContext;
  SplitFractions split{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};

  std::string preset = "small";  // small | large | custom
  int embedding = kDefaultEmbedding;
  std::vector<int> hidden{500, 250, 50};

  std::uint64_t seed = 1;
  int eval_interval = 200;
  // Also train a DP model on the private corpus from random init.
  bool dp_scratch = false;

  TrainConfig pretrain;       // public_only and private_only (from scratch)
  TrainConfig finetune;       // non-private fine-tune
  TrainConfig private_train;  // dp_finetune and dp_scratch; optimizer must be dpsgd
  std::optional<PrivacySpec> privacy = PrivacySpec{};

  std::vector<std::string> prompts{"Bob lives close to the"};
  int generate_length = 10;
  DecodeMode generate_mode = DecodeMode::kSample;

  // Defaults for a preset: epochs 5 + 5 (small) or 2 + 2 (large).
  static ExperimentConfig defaults(const std::string& preset = "small");

  static ExperimentConfig from_key_values(const KeyValueFile& kv,
                                          const std::filesystem::path& base_dir);
  // Parses and checks that the corpus paths exist.
  static ExperimentConfig load(const std::filesystem::path& path);
  KeyValueFile to_key_values() const;
  void save(const std::filesystem::path& path) const;

  // SHA-256 of the canonical serialization.
  std::string hash() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  void validate() const;
};

struct PreparedData {
  Vocabulary vocab;
  ContextWindowDataset public_train;
  DatasetSplits private_splits;
  Architecture arch;
};

// Shared vocabulary, context windows and the private split for a config.
PreparedData prepare_data(const ExperimentConfig& config);

struct EpsilonReport {
  double delta = 0.0;
  double epsilon = 0.0;
  int order = 0;
  int gamma = 1;
  double epsilon_group = 0.0;

  // "delta=<d> epsilon=<e> order=<l> gamma=<g> epsilon_group=<e/g>"
  std::string line() const;
  static EpsilonReport parse(std::string_view line);
  bool operator==(const EpsilonReport&) const = default;
};

EpsilonReport make_epsilon_report(const PrivacyLedger& ledger, const PrivacySpec& spec);

struct StageRecord {
  std::string name;
  std::string label;  // "<training set> / <testing set>"
  double sigma = 0.0;
  std::string init = "random";  // or the name of the stage it starts from
  std::string init_sha256;      // checkpoint hash of `init`, empty for random
  std::filesystem::path checkpoint;
  std::string checkpoint_sha256;
  std::filesystem::path metrics;
  long long steps = 0;
  bool diverged = false;
  std::optional<PrivacyLedger> ledger;
  std::optional<EpsilonReport> epsilon;
};

struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::filesystem::path directory;  // where the manifest lives; not serialized
  std::filesystem::path vocabulary;
  std::filesystem::path samples;
  std::vector<StageRecord> stages;

  const StageRecord* find(std::string_view stage) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;

  KeyValueFile to_key_values() const;
  static RunManifest from_key_values(const KeyValueFile& kv, const std::filesystem::path& directory);
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

struct StageOutcome {
  std::string stage;
  double dev_perplexity = 0.0;
  double test_perplexity = 0.0;
};

struct RunResult {
  RunManifest manifest;
  std::filesystem::path manifest_path;
  std::vector<StageOutcome> outcomes;  // in-memory final perplexities
};

// Runs every configured stage in order and writes vocab.txt, <stage>.ckpt,
// <stage>.metrics.csv, samples.txt and manifest.txt to the output dir. A
// failing stage aborts with its name in the message.
RunResult run_schema(const ExperimentConfig& config);

struct ComparisonRow {
  std::string stage;
  std::string label;
  double sigma = 0.0;
  double dev_perplexity = 0.0;
  double test_perplexity = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  // Absent when a needed stage was not run.
  std::optional<bool> finetune_beats_baselines;
  std::optional<bool> dp_finetune_beats_public_only;
  std::optional<bool> dp_scratch_worst_or_divergent;
};

// Flags computed from final test perplexities.
ComparisonReport compare_outcomes(const std::vector<ComparisonRow>& rows);
// Reads the final perplexities back from each stage's metrics CSV.
ComparisonReport compare_report(const RunManifest& manifest);
void print_comparison(const ComparisonReport& report, std::ostream& out);

struct TokenCountRow {
  std::string dataset;
  long long train_tokens = 0;
  std::optional<long long> test_tokens;
};

std::vector<TokenCountRow> token_report(const PreparedData& data);
void print_token_report(const std::vector<TokenCountRow>& rows, std::ostream& out);

}  // namespace dpft

#endif  // DPFT_EXPERIMENT_HPP_
