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

#include "dpft/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpft/error.hpp"
#include "dpft/sha256.hpp"

namespace dpft {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestFile = "manifest.txt";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kSamplesFile = "samples.txt";
constexpr const char* kFinalMetric = "final_perplexity";

int preset_epochs(const std::string& preset) { return preset == "large" ? 2 : 5; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::vector<std::string> items;
  for (int v : values) items.push_back(std::to_string(v));
  return join(items, ",");
}

void write_train(KeyValueFile& kv, const std::string& prefix, const TrainConfig& c) {
  kv.set(prefix + ".optimizer", std::string(to_string(c.optimizer)));
  kv.set(prefix + ".batch_size", std::to_string(c.batch_size));
  kv.set(prefix + ".epochs", std::to_string(c.epochs));
  kv.set(prefix + ".learning_rate", format_double(c.learning_rate));
}

TrainConfig read_train(const KeyValueFile& kv, const std::string& prefix, TrainConfig c) {
  if (auto v = kv.find(prefix + ".optimizer")) c.optimizer = parse_optimizer_kind(*v);
  if (auto v = kv.find(prefix + ".batch_size")) c.batch_size = parse_int_value(*v, prefix + ".batch_size");
  if (auto v = kv.find(prefix + ".epochs")) c.epochs = parse_int_value(*v, prefix + ".epochs");
  if (auto v = kv.find(prefix + ".learning_rate")) {
    c.learning_rate = parse_double_value(*v, prefix + ".learning_rate");
  }
  return c;
}

// Known keys; anything else in a config file is rejected as a typo.
bool known_key(std::string_view key) {
  static const char* const kFixed[] = {
      "paths.public", "paths.private", "paths.output", "vocab.min_count", "data.context",
      "data.split.train", "data.split.dev", "data.split.test", "model.preset", "model.embedding",
      "model.hidden", "run.seed", "run.eval_interval", "run.dp_scratch", "privacy.enabled",
      "privacy.sigma", "privacy.clip_norm", "privacy.delta", "privacy.gamma",
      "privacy.per_example_noise", "generate.prompts", "generate.length", "generate.mode"};
  for (const char* k : kFixed) {
    if (key == k) return true;
  }
  for (const char* prefix : {"pretrain.", "finetune.", "private."}) {
    const std::string_view p(prefix);
    if (key.substr(0, p.size()) != p) continue;
    const auto field = key.substr(p.size());
    return field == "optimizer" || field == "batch_size" || field == "epochs" ||
           field == "learning_rate";
  }
  return false;
}

struct StagePlan {
  std::string name;
  std::string label;
  std::string init;  // "random" or a stage name
  bool on_public = false;
  const TrainConfig* train = nullptr;
  bool dp = false;
};

std::vector<StagePlan> plan_stages(const ExperimentConfig& c) {
  std::vector<StagePlan> plan{
      {kStagePublicOnly, "public / private", "random", true, &c.pretrain, false},
      {kStagePrivateOnly, "private / private", "random", false, &c.pretrain, false},
      {kStageFinetune, "public + private / private", kStagePublicOnly, false, &c.finetune, false},
  };
  if (c.privacy) {
    plan.push_back({kStageDpFinetune, "public + private (DP) / private", kStagePublicOnly, false,
                    &c.private_train, true});
    if (c.dp_scratch) {
      plan.push_back(
          {kStageDpScratch, "private (DP) / private", "random", false, &c.private_train, true});
    }
  }
  return plan;
}

double final_metric(const std::vector<MetricRow>& rows, std::string_view split) {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->split == split && it->metric == kFinalMetric) return it->value;
  }
  throw InvalidArgument("metrics have no final " + std::string(split) + " perplexity");
}

std::string stage_key(const std::string& stage, std::string_view field) {
  return "stage." + stage + "." + std::string(field);
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& preset) {
  ExperimentConfig c;
  c.preset = preset;
  if (preset == "small" || preset == "large") {
    c.hidden = Architecture::preset(preset, static_cast<int>(kSpecialTokens.size()) + 1).hidden;
  }
  const int epochs = preset_epochs(preset);
  c.pretrain.epochs = epochs;
  c.finetune.epochs = epochs;
  c.private_train.epochs = epochs;
  c.private_train.optimizer = OptimizerKind::kDpsgd;
  return c;
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValueFile& kv, const fs::path& base_dir) {
  for (const auto& [key, value] : kv.entries()) {
    if (!known_key(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  const std::string preset = kv.find("model.preset").value_or("small");
  if (preset != "small" && preset != "large" && preset != "custom") {
    throw InvalidArgument("model.preset must be small, large or custom");
  }
  ExperimentConfig c = defaults(preset);
  c.base_dir = base_dir;
  c.public_corpus = kv.get("paths.public");
  c.private_corpus = kv.get("paths.private");
  c.output_dir = kv.get("paths.output");

  if (auto v = kv.find("vocab.min_count")) c.min_count = parse_int_value(*v, "vocab.min_count");
  if (auto v = kv.find("data.context")) c.context = parse_int_value(*v, "data.context");
  if (auto v = kv.find("data.split.train")) c.split.train = parse_double_value(*v, "data.split.train");
  if (auto v = kv.find("data.split.dev")) c.split.dev = parse_double_value(*v, "data.split.dev");
  if (auto v = kv.find("data.split.test")) c.split.test = parse_double_value(*v, "data.split.test");

  if (auto v = kv.find("model.embedding")) c.embedding = parse_int_value(*v, "model.embedding");
  if (auto v = kv.find("model.hidden")) {
    std::vector<int> hidden;
    for (const auto& item : split_list(*v, ',')) hidden.push_back(parse_int_value(item, "model.hidden"));
    if (preset != "custom" && hidden != c.hidden) {
      throw InvalidArgument("model.hidden conflicts with preset '" + preset + "'; use model.preset=custom");
    }
    c.hidden = std::move(hidden);
  } else if (preset == "custom") {
    throw InvalidArgument("model.preset=custom requires model.hidden");
  }

  if (auto v = kv.find("run.seed")) c.seed = static_cast<std::uint64_t>(parse_int64_value(*v, "run.seed"));
  if (auto v = kv.find("run.eval_interval")) c.eval_interval = parse_int_value(*v, "run.eval_interval");
  if (auto v = kv.find("run.dp_scratch")) c.dp_scratch = parse_bool_value(*v, "run.dp_scratch");

  c.pretrain = read_train(kv, "pretrain", c.pretrain);
  c.finetune = read_train(kv, "finetune", c.finetune);
  c.private_train = read_train(kv, "private", c.private_train);

  const bool enabled = parse_bool_value(kv.find("privacy.enabled").value_or("true"), "privacy.enabled");
  if (enabled) {
    PrivacySpec p;
    if (auto v = kv.find("privacy.sigma")) p.sigma = parse_double_value(*v, "privacy.sigma");
    if (auto v = kv.find("privacy.clip_norm")) p.clip_norm = parse_double_value(*v, "privacy.clip_norm");
    if (auto v = kv.find("privacy.delta")) p.delta = parse_double_value(*v, "privacy.delta");
    if (auto v = kv.find("privacy.gamma")) p.gamma = parse_int_value(*v, "privacy.gamma");
    if (auto v = kv.find("privacy.per_example_noise")) {
      p.per_example_noise = parse_bool_value(*v, "privacy.per_example_noise");
    }
    c.privacy = p;
  } else {
    c.privacy.reset();
  }

  if (auto v = kv.find("generate.prompts")) c.prompts = split_list(*v, '|');
  if (auto v = kv.find("generate.length")) c.generate_length = parse_int_value(*v, "generate.length");
  if (auto v = kv.find("generate.mode")) c.generate_mode = parse_decode_mode(*v);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  const auto kv = KeyValueFile::load(path);
  auto c = from_key_values(kv, fs::absolute(path).parent_path());
  for (const auto* p : {&c.public_corpus, &c.private_corpus}) {
    if (!fs::exists(c.resolve(*p))) {
      throw IoError(path.string() + ": corpus '" + c.resolve(*p).string() + "' does not exist");
    }
  }
  return c;
}

KeyValueFile ExperimentConfig::to_key_values() const {
  KeyValueFile kv;
  kv.set("paths.public", public_corpus.generic_string());
  kv.set("paths.private", private_corpus.generic_string());
  kv.set("paths.output", output_dir.generic_string());
  kv.set("vocab.min_count", std::to_string(min_count));
  kv.set("data.context", std::to_string(context));
  kv.set("data.split.train", format_double(split.train));
  kv.set("data.split.dev", format_double(split.dev));
  kv.set("data.split.test", format_double(split.test));
  kv.set("model.preset", preset);
  kv.set("model.embedding", std::to_string(embedding));
  kv.set("model.hidden", join_ints(hidden));
  kv.set("run.seed", std::to_string(seed));
  kv.set("run.eval_interval", std::to_string(eval_interval));
  kv.set("run.dp_scratch", dp_scratch ? "true" : "false");
  write_train(kv, "pretrain", pretrain);
  write_train(kv, "finetune", finetune);
  write_train(kv, "private", private_train);
  kv.set("privacy.enabled", privacy ? "true" : "false");
  if (privacy) {
    kv.set("privacy.sigma", format_double(privacy->sigma));
    kv.set("privacy.clip_norm", format_double(privacy->clip_norm));
    kv.set("privacy.delta", format_double(privacy->delta));
    kv.set("privacy.gamma", std::to_string(privacy->gamma));
    kv.set("privacy.per_example_noise", privacy->per_example_noise ? "true" : "false");
  }
  kv.set("generate.prompts", join(prompts, " | "));
  kv.set("generate.length", std::to_string(generate_length));
  kv.set("generate.mode", generate_mode == DecodeMode::kGreedy ? "greedy" : "sample");
  return kv;
}

void ExperimentConfig::save(const fs::path& path) const { to_key_values().save(path); }

std::string ExperimentConfig::hash() const { return sha256_hex(to_key_values().str()); }

fs::path ExperimentConfig::resolve(const fs::path& p) const {
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void ExperimentConfig::validate() const {
  if (public_corpus.empty() || private_corpus.empty() || output_dir.empty()) {
    throw InvalidArgument("config needs paths.public, paths.private and paths.output");
  }
  if (min_count < 1) throw InvalidArgument("vocab.min_count must be positive");
  if (!(split.train > 0.0) || split.dev < 0.0 || split.test < 0.0 ||
      std::abs(split.train + split.dev + split.test - 1.0) > 1e-9) {
    throw InvalidArgument("data.split shares must be non-negative, with train > 0, and sum to 1");
  }
  if (eval_interval < 1) throw InvalidArgument("run.eval_interval must be positive");
  for (const auto* t : {&pretrain, &finetune, &private_train}) t->validate();
  if (pretrain.optimizer == OptimizerKind::kDpsgd || finetune.optimizer == OptimizerKind::kDpsgd) {
    throw InvalidArgument("pretrain and finetune stages are non-private; use the private section for dpsgd");
  }
  if (privacy) {
    privacy->validate();
    if (private_train.optimizer != OptimizerKind::kDpsgd) {
      throw InvalidArgument("private.optimizer must be dpsgd when privacy is enabled");
    }
  }
  if (dp_scratch && !privacy) throw InvalidArgument("run.dp_scratch requires privacy.enabled=true");
  for (const auto& p : prompts) {
    if (p.empty() || p.find('|') != std::string::npos || p.find('\n') != std::string::npos) {
      throw InvalidArgument("generation prompts must be non-empty and free of '|' and newlines");
    }
  }
  if (generate_length < 1) throw InvalidArgument("generate.length must be positive");
  Architecture{context, embedding, hidden, static_cast<int>(kSpecialTokens.size()) + 1}.validate();
}

PreparedData prepare_data(const ExperimentConfig& config) {
  const auto public_lines = read_lines(config.resolve(config.public_corpus));
  const auto private_lines = read_lines(config.resolve(config.private_corpus));
  PreparedData data;
  data.vocab = build_vocabulary(public_lines, private_lines, config.min_count);
  data.public_train = windows(encode_all(public_lines, data.vocab), config.context);
  data.private_splits =
      split(windows(encode_all(private_lines, data.vocab), config.context), config.split, config.seed);
  data.arch = Architecture{config.context, config.embedding, config.hidden, data.vocab.size()};
  data.arch.validate();
  return data;
}

std::string EpsilonReport::line() const {
  return "delta=" + format_double(delta) + " epsilon=" + format_double(epsilon) +
         " order=" + std::to_string(order) + " gamma=" + std::to_string(gamma) +
         " epsilon_group=" + format_double(epsilon_group);
}

EpsilonReport EpsilonReport::parse(std::string_view line) {
  std::istringstream in{std::string(line)};
  KeyValueFile kv;
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw InvalidArgument("epsilon report field '" + field + "' lacks '='");
    kv.set(field.substr(0, eq), field.substr(eq + 1));
  }
  EpsilonReport r;
  r.delta = parse_double_value(kv.get("delta"), "delta");
  r.epsilon = parse_double_value(kv.get("epsilon"), "epsilon");
  r.order = parse_int_value(kv.get("order"), "order");
  r.gamma = parse_int_value(kv.get("gamma"), "gamma");
  r.epsilon_group = parse_double_value(kv.get("epsilon_group"), "epsilon_group");
  return r;
}

EpsilonReport make_epsilon_report(const PrivacyLedger& ledger, const PrivacySpec& spec) {
  if (!spec.is_private()) throw InvalidArgument("epsilon is undefined for sigma = 0");
  const auto best = epsilon(compose(ledger), spec.delta);
  return EpsilonReport{spec.delta, best.epsilon, best.order, spec.gamma,
                       group_rescale(best.epsilon, spec.gamma)};
}

const StageRecord* RunManifest::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

fs::path RunManifest::resolve(const fs::path& p) const {
  return p.is_absolute() || directory.empty() ? p : directory / p;
}

KeyValueFile RunManifest::to_key_values() const {
  KeyValueFile kv;
  kv.set("run_id", run_id);
  kv.set("config_hash", config_hash);
  kv.set("seed", std::to_string(seed));
  kv.set("vocabulary", vocabulary.generic_string());
  kv.set("samples", samples.generic_string());
  std::vector<std::string> names;
  for (const auto& s : stages) names.push_back(s.name);
  kv.set("stages", join(names, ","));
  for (const auto& s : stages) {
    kv.set(stage_key(s.name, "label"), s.label);
    kv.set(stage_key(s.name, "sigma"), format_double(s.sigma));
    kv.set(stage_key(s.name, "init"), s.init);
    if (!s.init_sha256.empty()) kv.set(stage_key(s.name, "init_sha256"), s.init_sha256);
    kv.set(stage_key(s.name, "checkpoint"), s.checkpoint.generic_string());
    kv.set(stage_key(s.name, "checkpoint_sha256"), s.checkpoint_sha256);
    kv.set(stage_key(s.name, "metrics"), s.metrics.generic_string());
    kv.set(stage_key(s.name, "steps"), std::to_string(s.steps));
    kv.set(stage_key(s.name, "diverged"), s.diverged ? "true" : "false");
    if (s.ledger) {
      kv.set(stage_key(s.name, "ledger"), s.ledger->serialize());
      kv.set(stage_key(s.name, "amplification"), s.ledger->amplification());
    }
    if (s.epsilon) kv.set(stage_key(s.name, "epsilon"), s.epsilon->line());
  }
  return kv;
}

RunManifest RunManifest::from_key_values(const KeyValueFile& kv, const fs::path& directory) {
  RunManifest m;
  m.directory = directory;
  m.run_id = kv.get("run_id");
  m.config_hash = kv.get("config_hash");
  m.seed = static_cast<std::uint64_t>(parse_int64_value(kv.get("seed"), "seed"));
  m.vocabulary = kv.get("vocabulary");
  m.samples = kv.get("samples");
  for (const auto& name : split_list(kv.get("stages"), ',')) {
    StageRecord s;
    s.name = name;
    s.label = kv.get(stage_key(name, "label"));
    s.sigma = parse_double_value(kv.get(stage_key(name, "sigma")), stage_key(name, "sigma"));
    s.init = kv.get(stage_key(name, "init"));
    s.init_sha256 = kv.find(stage_key(name, "init_sha256")).value_or("");
    s.checkpoint = kv.get(stage_key(name, "checkpoint"));
    s.checkpoint_sha256 = kv.get(stage_key(name, "checkpoint_sha256"));
    s.metrics = kv.get(stage_key(name, "metrics"));
    s.steps = parse_int64_value(kv.get(stage_key(name, "steps")), stage_key(name, "steps"));
    s.diverged = parse_bool_value(kv.get(stage_key(name, "diverged")), stage_key(name, "diverged"));
    if (auto ledger = kv.find(stage_key(name, "ledger"))) {
      s.ledger = PrivacyLedger::deserialize(
          *ledger, kv.find(stage_key(name, "amplification")).value_or(kSampledGaussianTag));
    }
    if (auto eps = kv.find(stage_key(name, "epsilon"))) s.epsilon = EpsilonReport::parse(*eps);
    m.stages.push_back(std::move(s));
  }
  return m;
}

void RunManifest::save(const fs::path& path) const { to_key_values().save(path); }

RunManifest RunManifest::load(const fs::path& path) {
  return from_key_values(KeyValueFile::load(path), fs::absolute(path).parent_path());
}

RunResult run_schema(const ExperimentConfig& config) {
  config.validate();
  const PreparedData data = prepare_data(config);
  const fs::path out_dir = config.resolve(config.output_dir);
  fs::create_directories(out_dir);
  write_vocabulary(data.vocab, out_dir / kVocabFile);

  const ContextWindowDataset& private_train = data.private_splits.train;
  const ContextWindowDataset& dev = data.private_splits.dev;
  const ContextWindowDataset& test = data.private_splits.test;

  RunResult result;
  RunManifest& manifest = result.manifest;
  manifest.config_hash = config.hash();
  manifest.seed = config.seed;
  manifest.run_id = manifest.config_hash.substr(0, 12) + "-s" + std::to_string(config.seed);
  manifest.directory = out_dir;
  manifest.vocabulary = kVocabFile;
  manifest.samples = kSamplesFile;

  std::ostringstream samples;
  const auto plan = plan_stages(config);
  for (std::size_t index = 0; index < plan.size(); ++index) {
    const StagePlan& stage = plan[index];
    try {
      Rng stage_rng(config.seed, {static_cast<std::uint32_t>(index)});
      StageRecord record;
      record.name = stage.name;
      record.label = stage.label;
      record.init = stage.init;
      record.checkpoint = stage.name + ".ckpt";
      record.metrics = stage.name + ".metrics.csv";

      LanguageModel model;
      if (stage.init == "random") {
        model = LanguageModel::initialized(data.arch, stage_rng);
      } else {
        const StageRecord* parent = manifest.find(stage.init);
        if (!parent) throw Error("initial stage '" + stage.init + "' has not run");
        const fs::path parent_ckpt = manifest.resolve(parent->checkpoint);
        model = load_checkpoint(parent_ckpt);
        record.init_sha256 = sha256_file(parent_ckpt);
      }

      TrainConfig train_config = *stage.train;
      train_config.seed = stage_rng.engine()();
      train_config.eval_interval = config.eval_interval;
      const ContextWindowDataset& train_data = stage.on_public ? data.public_train : private_train;
      const std::optional<PrivacySpec> spec = stage.dp ? config.privacy : std::nullopt;

      TrainResult trained = train(std::move(model), train_data, dev, train_config, spec);
      record.steps = trained.steps;
      record.diverged = trained.diverged;
      if (stage.dp) {
        record.sigma = spec->sigma;
        record.ledger = trained.ledger;
        if (spec->is_private()) record.epsilon = make_epsilon_report(trained.ledger, *spec);
      }

      const double inf = std::numeric_limits<double>::infinity();
      const double dev_pp = trained.diverged || dev.size() == 0 ? inf : perplexity(trained.model, dev);
      const double test_pp = trained.diverged || test.size() == 0 ? inf : perplexity(trained.model, test);
      const int epochs = train_config.epochs;
      trained.metrics.push_back(MetricRow{trained.steps, epochs, "dev", kFinalMetric, dev_pp});
      trained.metrics.push_back(MetricRow{trained.steps, epochs, "test", kFinalMetric, test_pp});

      const fs::path ckpt_path = out_dir / record.checkpoint;
      save_checkpoint(trained.model, ckpt_path);
      record.checkpoint_sha256 = sha256_file(ckpt_path);
      write_metrics_csv(trained.metrics, out_dir / record.metrics);

      if (!trained.diverged) {
        for (std::size_t p = 0; p < config.prompts.size(); ++p) {
          GenerateOptions options;
          options.length = config.generate_length;
          options.mode = config.generate_mode;
          options.seed = config.seed + p;
          std::string text;
          try {
            text = generate(trained.model, data.vocab, config.prompts[p], options);
          } catch (const DivergenceError&) {
            text = "<diverged>";
          }
          samples << stage.name << '\t' << config.prompts[p] << '\t' << text << '\n';
        }
      }

      result.outcomes.push_back(StageOutcome{stage.name, dev_pp, test_pp});
      manifest.stages.push_back(std::move(record));
    } catch (const std::exception& e) {
      throw Error("stage " + stage.name + " failed: " + e.what());
    }
  }

  {
    std::ofstream out(out_dir / kSamplesFile, std::ios::binary);
    out << samples.str();
    if (!out) throw IoError((out_dir / kSamplesFile).string() + ": write failed");
  }
  result.manifest_path = out_dir / kManifestFile;
  manifest.save(result.manifest_path);
  return result;
}

ComparisonReport compare_outcomes(const std::vector<ComparisonRow>& rows) {
  ComparisonReport report;
  report.rows = rows;
  auto test_of = [&](std::string_view stage) -> std::optional<double> {
    for (const auto& r : rows) {
      if (r.stage == stage) return r.test_perplexity;
    }
    return std::nullopt;
  };
  const auto pub = test_of(kStagePublicOnly);
  const auto priv = test_of(kStagePrivateOnly);
  const auto ft = test_of(kStageFinetune);
  const auto dp = test_of(kStageDpFinetune);
  const auto scratch = test_of(kStageDpScratch);
  if (pub && priv && ft) report.finetune_beats_baselines = *ft < *pub && *ft < *priv;
  if (pub && dp) report.dp_finetune_beats_public_only = *dp < *pub;
  if (scratch && rows.size() > 1) {
    bool worst = std::isinf(*scratch);
    if (!worst) {
      worst = std::all_of(rows.begin(), rows.end(), [&](const ComparisonRow& r) {
        return r.stage == kStageDpScratch || *scratch > r.test_perplexity;
      });
    }
    report.dp_scratch_worst_or_divergent = worst;
  }
  return report;
}

ComparisonReport compare_report(const RunManifest& manifest) {
  if (manifest.stages.empty()) throw InvalidArgument("manifest lists no stages");
  std::vector<ComparisonRow> rows;
  for (const auto& s : manifest.stages) {
    const fs::path metrics = manifest.resolve(s.metrics);
    const fs::path ckpt = manifest.resolve(s.checkpoint);
    if (!fs::exists(metrics) || !fs::exists(ckpt)) {
      throw IoError("incomplete manifest: stage " + s.name + " is missing its checkpoint or metrics");
    }
    const auto csv = read_metrics_csv(metrics);
    rows.push_back(ComparisonRow{s.name, s.label, s.sigma, final_metric(csv, "dev"),
                                 final_metric(csv, "test")});
  }
  return compare_outcomes(rows);
}

void print_comparison(const ComparisonReport& report, std::ostream& out) {
  std::size_t width = std::string_view("Training / Testing set").size();
  for (const auto& r : report.rows) width = std::max(width, r.label.size());
  out << std::left << std::setw(static_cast<int>(width)) << "Training / Testing set"
      << "  " << std::setw(8) << "sigma" << "  " << std::setw(14) << "PP (dev)"
      << "  " << "PP (test)" << '\n';
  for (const auto& r : report.rows) {
    std::ostringstream dev, test;
    dev << std::fixed << std::setprecision(2) << r.dev_perplexity;
    test << std::fixed << std::setprecision(2) << r.test_perplexity;
    out << std::setw(static_cast<int>(width)) << r.label << "  " << std::setw(8)
        << format_double(r.sigma) << "  " << std::setw(14) << dev.str() << "  " << test.str()
        << '\n';
  }
  auto flag = [](const std::optional<bool>& f) -> std::string {
    return f ? (*f ? "true" : "false") : "n/a";
  };
  out << std::right << '\n';
  out << "finetune_beats_baselines=" << flag(report.finetune_beats_baselines) << '\n';
  out << "dp_finetune_beats_public_only=" << flag(report.dp_finetune_beats_public_only) << '\n';
  out << "dp_scratch_worst_or_divergent=" << flag(report.dp_scratch_worst_or_divergent) << '\n';
}

std::vector<TokenCountRow> token_report(const PreparedData& data) {
  const auto& s = data.private_splits;
  return {
      TokenCountRow{"private", static_cast<long long>(s.train.size()),
                    static_cast<long long>(s.test.size())},
      TokenCountRow{"public", static_cast<long long>(data.public_train.size()), std::nullopt},
  };
}

void print_token_report(const std::vector<TokenCountRow>& rows, std::ostream& out) {
  out << std::left << std::setw(10) << "Dataset" << "  " << std::setw(14) << "Tokens (train)"
      << "  " << "Tokens (test)" << '\n';
  for (const auto& r : rows) {
    out << std::setw(10) << r.dataset << "  " << std::setw(14) << r.train_tokens << "  "
        << (r.test_tokens ? std::to_string(*r.test_tokens) : "-") << '\n';
  }
  out << std::right;
}

}  // namespace dpft
