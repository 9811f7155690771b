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

// dpft command-line driver.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpft/accountant.hpp"
#include "dpft/corpus.hpp"
#include "dpft/error.hpp"
#include "dpft/experiment.hpp"
#include "dpft/keyvalue.hpp"
#include "dpft/model.hpp"
#include "dpft/optimizer.hpp"
#include "dpft/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

int build_vocab(const std::string& public_path, const std::string& private_path, int min_count,
                const std::string& out_path) {
  const auto pub = dpft::read_lines(fs::path(public_path));
  const auto priv = dpft::read_lines(fs::path(private_path));
  const auto vocab = dpft::build_vocabulary(pub, priv, min_count);
  dpft::write_vocabulary(vocab, fs::path(out_path));
  std::cout << "vocab_size=" << vocab.size() << '\n';
  return 0;
}

int eval(const std::string& model_path, const std::string& data_path, const std::string& vocab_path,
         const std::string& metrics_path) {
  const auto model = dpft::load_checkpoint(fs::path(model_path));
  const auto vocab = dpft::read_vocabulary(fs::path(vocab_path));
  if (vocab.size() != model.arch.vocab) {
    throw dpft::ShapeError("vocabulary has " + std::to_string(vocab.size()) +
                           " entries but the model expects " + std::to_string(model.arch.vocab));
  }
  const auto lines = dpft::read_lines(fs::path(data_path));
  const auto data = dpft::windows(dpft::encode_all(lines, vocab), model.arch.context);
  const double pp = dpft::perplexity(model, data);
  std::cout << "perplexity=" << dpft::format_double(pp) << '\n';

  if (!metrics_path.empty()) {
    const bool fresh = !fs::exists(metrics_path) || fs::file_size(metrics_path) == 0;
    std::ofstream out(metrics_path, std::ios::app | std::ios::binary);
    if (!out) throw dpft::IoError(metrics_path + ": cannot open for appending");
    if (fresh) out << dpft::kMetricsHeader << '\n';
    out << "0,0,eval,perplexity," << dpft::format_double(pp) << '\n';
  }
  return 0;
}

int generate(const std::string& model_path, std::string vocab_path, const std::string& prompt,
             const dpft::GenerateOptions& options) {
  const auto model = dpft::load_checkpoint(fs::path(model_path));
  if (vocab_path.empty()) vocab_path = (fs::path(model_path).parent_path() / "vocab.txt").string();
  const auto vocab = dpft::read_vocabulary(fs::path(vocab_path));
  std::cout << dpft::generate(model, vocab, prompt, options) << '\n';
  return 0;
}

int account(double q, double sigma, long long steps, double delta, int gamma) {
  const auto best = dpft::epsilon_for(q, sigma, steps, delta);
  std::cout << "epsilon=" << dpft::format_double(best.epsilon) << " order=" << best.order
            << " epsilon_group=" << dpft::format_double(dpft::group_rescale(best.epsilon, gamma))
            << '\n';
  return 0;
}

int account_curve(double q, long long steps, const std::vector<double>& sigmas,
                  const std::vector<double>& deltas) {
  std::cout << "sigma,delta,epsilon\n";
  for (double sigma : sigmas) {
    dpft::PrivacyLedger ledger;
    ledger.record(dpft::LedgerEntry{q, sigma, steps});
    const auto curve = dpft::compose(ledger);
    for (double delta : deltas) {
      std::cout << dpft::format_double(sigma) << ',' << dpft::format_double(delta) << ','
                << dpft::format_double(dpft::epsilon(curve, delta).epsilon) << '\n';
    }
  }
  return 0;
}

int run(const std::string& config_path) {
  const auto config = dpft::ExperimentConfig::load(config_path);
  const auto result = dpft::run_schema(config);
  for (const auto& o : result.outcomes) {
    std::cout << o.stage << ": dev_perplexity=" << dpft::format_double(o.dev_perplexity)
              << " test_perplexity=" << dpft::format_double(o.test_perplexity) << '\n';
  }
  for (const auto& s : result.manifest.stages) {
    if (s.epsilon) std::cout << s.name << ": " << s.epsilon->line() << '\n';
  }
  std::cout << "manifest=" << result.manifest_path.string() << '\n';
  return 0;
}

int report(const std::string& manifest_path) {
  const auto manifest = dpft::RunManifest::load(manifest_path);
  dpft::print_comparison(dpft::compare_report(manifest), std::cout);
  for (const auto& s : manifest.stages) {
    if (s.epsilon) std::cout << s.name << ": " << s.epsilon->line() << '\n';
  }
  return 0;
}

int tokens(const std::string& config_path) {
  const auto config = dpft::ExperimentConfig::load(config_path);
  dpft::print_token_report(dpft::token_report(dpft::prepare_data(config)), std::cout);
  return 0;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw dpft::IoError(path.string() + ": write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedforward language models with differentially private fine-tuning"};
  app.require_subcommand(1);
  int status = 0;

  std::string public_path, private_path, out_path;
  int min_count = dpft::kDefaultMinCount;
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Build a shared vocabulary from both corpora");
  vocab_cmd->add_option("--public", public_path, "Public corpus, one sentence per line")->required();
  vocab_cmd->add_option("--private", private_path, "Private corpus, one sentence per line")->required();
  vocab_cmd->add_option("--min-count", min_count, "Minimum combined count to keep a word")
      ->capture_default_str();
  vocab_cmd->add_option("--out", out_path, "Output vocabulary file")->required();
  vocab_cmd->callback([&] { status = build_vocab(public_path, private_path, min_count, out_path); });

  std::string model_path, data_path, vocab_path, metrics_path;
  auto* eval_cmd = app.add_subcommand("eval", "Perplexity of a checkpoint on a text file");
  eval_cmd->add_option("--model", model_path, "Checkpoint")->required();
  eval_cmd->add_option("--data", data_path, "Text, one sentence per line")->required();
  eval_cmd->add_option("--vocab", vocab_path, "Vocabulary file")->required();
  eval_cmd->add_option("--metrics", metrics_path, "Metrics CSV to append a row to");
  eval_cmd->callback([&] { status = eval(model_path, data_path, vocab_path, metrics_path); });

  std::string prompt, mode = "sample";
  dpft::GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Continue a prompt");
  gen_cmd->add_option("--model", model_path, "Checkpoint")->required();
  gen_cmd->add_option("--vocab", vocab_path, "Vocabulary file (default: vocab.txt beside the model)");
  gen_cmd->add_option("--prompt", prompt, "Prompt text")->required();
  gen_cmd->add_option("--length", gen.length, "Tokens to generate")->capture_default_str();
  gen_cmd->add_option("--mode", mode, "greedy or sample")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  gen_cmd->add_option("--temperature", gen.temperature, "Sampling temperature")->capture_default_str();
  gen_cmd->callback([&] {
    gen.mode = dpft::parse_decode_mode(mode);
    status = generate(model_path, vocab_path, prompt, gen);
  });

  double q = 0.0, sigma = 0.0, delta = 1e-5;
  long long steps = 0;
  int gamma = 1;
  auto* acc_cmd = app.add_subcommand("account", "Epsilon of T subsampled Gaussian steps");
  acc_cmd->add_option("--q", q, "Sampling rate L/N")->required();
  acc_cmd->add_option("--sigma", sigma, "Noise multiplier (not its square)")->required();
  acc_cmd->add_option("--steps", steps, "Number of steps T")->required();
  acc_cmd->add_option("--delta", delta, "Target delta")->required();
  acc_cmd->add_option("--gamma", gamma, "Sentences per individual")->capture_default_str();
  acc_cmd->callback([&] { status = account(q, sigma, steps, delta, gamma); });

  double curve_q = 1e-3;
  long long curve_steps = 100000;
  std::vector<double> sigmas{0.5, 0.75, 1.0, 1.1, 1.5, 2.0, 3.0, 4.0};
  std::vector<double> deltas{1e-7, 1e-5, 1e-3};
  auto* curve_cmd = app.add_subcommand("account-curve", "Epsilon over a sigma x delta grid as CSV");
  curve_cmd->add_option("--q", curve_q, "Sampling rate L/N")->capture_default_str();
  curve_cmd->add_option("--steps", curve_steps, "Number of steps T")->capture_default_str();
  curve_cmd->add_option("--sigmas", sigmas, "Noise multipliers")->delimiter(',')->capture_default_str();
  curve_cmd->add_option("--deltas", deltas, "Deltas")->delimiter(',')->capture_default_str();
  curve_cmd->callback([&] { status = account_curve(curve_q, curve_steps, sigmas, deltas); });

  std::string config_path, manifest_path;
  auto* run_cmd = app.add_subcommand("run", "Run every experiment stage from a config file");
  run_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->callback([&] { status = run(config_path); });

  auto* report_cmd = app.add_subcommand("report", "Final perplexity table for a finished run");
  report_cmd->add_option("--manifest", manifest_path, "manifest.txt of a run")->required();
  report_cmd->callback([&] { status = report(manifest_path); });

  auto* tokens_cmd = app.add_subcommand("tokens", "Train/test token counts per corpus");
  tokens_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  tokens_cmd->callback([&] { status = tokens(config_path); });

  dpft::SyntheticOptions synth;
  std::string synth_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Write a public/private pair of synthetic corpora");
  synth_cmd->add_option("--out-dir", synth_dir, "Directory for public.txt and private.txt")->required();
  synth_cmd->add_option("--words", synth.words, "Word types")->capture_default_str();
  synth_cmd->add_option("--public-sentences", synth.public_sentences)->capture_default_str();
  synth_cmd->add_option("--private-sentences", synth.private_sentences)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->callback([&] {
    const auto corpora = dpft::make_synthetic_corpora(synth);
    fs::create_directories(synth_dir);
    write_lines(fs::path(synth_dir) / "public.txt", corpora.public_lines);
    write_lines(fs::path(synth_dir) / "private.txt", corpora.private_lines);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const dpft::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
