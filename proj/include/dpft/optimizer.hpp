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

#ifndef DPFT_OPTIMIZER_HPP_
#define DPFT_OPTIMIZER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dpft/accountant.hpp"
#include "dpft/corpus.hpp"
#include "dpft/model.hpp"
#include "dpft/params.hpp"
#include "dpft/rng.hpp"

namespace dpft {

inline constexpr const char* kPerExampleNoiseTag =
    "sampled-Gaussian, q=L/N; per-example noise (non-standard)";

struct PrivacySpec {
  double sigma = 1.1;      // noise multiplier
  double clip_norm = 1.0;  // C
  double delta = 1e-5;
  int gamma = 1;  // max sentences contributed by one individual
  // Adds N(0, sigma^2 C^2) to every clipped example gradient instead of one
  // draw to the batch sum. Off by default.
  bool per_example_noise = false;

  // Throws InvalidArgument on sigma < 0, C <= 0, delta outside (0, 1) or gamma < 1.
  void validate() const;
  bool is_private() const { return sigma > 0.0; }
};

enum class OptimizerKind { kAdam, kSgd, kDpsgd };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct TrainConfig {
  int batch_size = 256;
  int epochs = 5;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // Steps between (train loss, dev perplexity) records; the last step is
  // always recorded.
  int eval_interval = 200;

  void validate() const;
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;

  static AdamState zeros(const ParamLayout& layout);
};

// g / max(1, |g| / C). Inputs within the ball are returned unchanged.
// Throws DivergenceError("divergent gradient") on non-finite entries.
GradVector clip_gradient(const GradVector& g, double clip_norm);

// Mean of per-example gradients over the rows.
GradVector batch_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                          RowIndices rows);

// (1 / L) [ sum_i clip(grad_i) + N(0, sigma^2 C^2 I) ] with one aggregate
// noise draw. Throws DivergenceError naming the batch index of a non-finite
// per-example gradient.
GradVector noisy_batch_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                                RowIndices rows, const PrivacySpec& spec, Rng& rng);

struct StepResult {
  LedgerEntry entry;
  double loss = 0.0;  // batch loss before the update
};

// theta <- theta - lr * noisy_batch_gradient; the entry records sigma and
// the sampling rate for one step (default: batch rows / dataset size).
StepResult dpsgd_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                      const PrivacySpec& spec, double learning_rate, Rng& rng,
                      std::optional<double> sampling_rate = std::nullopt);

// Bias-corrected Adam update from a gradient.
void adam_update(ParamVector& params, const GradVector& grad, double learning_rate,
                 AdamState& state, const AdamHyper& hyper = {});

double adam_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                 double learning_rate, AdamState& state, const AdamHyper& hyper = {});

double sgd_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                double learning_rate);

struct MetricRow {
  long long step = 0;
  int epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;

  bool operator==(const MetricRow&) const = default;
};

inline constexpr std::string_view kMetricsHeader = "step,epoch,split,metric,value";

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out);
void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);

struct TrainResult {
  LanguageModel model;
  std::vector<MetricRow> metrics;
  PrivacyLedger ledger;  // empty unless the optimizer is dpsgd
  long long steps = 0;
  bool diverged = false;
};

// epochs x ceil(N / L) steps over epoch-wise shuffles seeded by
// config.seed. `dev` may be empty, in which case only train loss is
// recorded. A non-finite gradient ends the run early with `diverged` set and
// +infinity recorded as dev perplexity.
TrainResult train(LanguageModel model, const ContextWindowDataset& data,
                  const ContextWindowDataset& dev, const TrainConfig& config,
                  const std::optional<PrivacySpec>& spec);

}  // namespace dpft

#endif  // DPFT_OPTIMIZER_HPP_
