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

#include "dpft/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "dpft/error.hpp"
#include "dpft/keyvalue.hpp"
#include "dpft/network.hpp"

namespace dpft {
namespace {

struct Batch {
  ContextMatrix contexts;
  TargetVector targets;
};

Batch gather(const ContextWindowDataset& data, RowIndices rows) {
  if (rows.empty()) throw InvalidArgument("empty batch");
  Batch batch;
  batch.contexts.resize(static_cast<Eigen::Index>(rows.size()), data.contexts.cols());
  batch.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r < 0 || r >= data.size()) throw InvalidArgument("batch row out of range");
    batch.contexts.row(static_cast<Eigen::Index>(i)) = data.contexts.row(r);
    batch.targets(static_cast<Eigen::Index>(i)) = data.targets(r);
  }
  return batch;
}

struct GradientWithLoss {
  GradVector grad;
  double loss = 0.0;
};

GradientWithLoss mean_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                               RowIndices rows) {
  const Batch batch = gather(data, rows);
  const auto fwd = forward_pass(model.params, model.arch, batch.contexts);
  const auto bwd = backward_pass(model.params, model.arch, fwd, batch.targets);
  const auto n = static_cast<Eigen::Index>(rows.size());
  GradientWithLoss out{GradVector(model.params.layout()), example_nll(fwd, batch.targets).mean()};
  accumulate_gradient<double>(model.arch, fwd, bwd, batch.contexts,
                              Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), out.grad);
  if (!out.grad.values().allFinite()) throw DivergenceError("divergent gradient");
  return out;
}

GradientWithLoss noisy_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                                RowIndices rows, const PrivacySpec& spec, Rng& rng) {
  spec.validate();
  const Batch batch = gather(data, rows);
  const auto fwd = forward_pass(model.params, model.arch, batch.contexts);
  const auto bwd = backward_pass(model.params, model.arch, fwd, batch.targets);
  const Eigen::VectorXd sq_norms = per_example_sq_norms(model.arch, fwd, bwd, batch.contexts);

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(sq_norms(i)) || !bwd.input_grad.col(i).allFinite()) {
      throw DivergenceError("divergent gradient at batch index " + std::to_string(i));
    }
    scale(i) = 1.0 / std::max(1.0, std::sqrt(sq_norms(i)) / spec.clip_norm);
  }

  GradientWithLoss out{GradVector(model.params.layout()), example_nll(fwd, batch.targets).mean()};
  accumulate_gradient<double>(model.arch, fwd, bwd, batch.contexts, scale, out.grad);
  if (spec.sigma > 0.0) {
    double stddev = spec.sigma * spec.clip_norm;
    // L independent per-example draws sum to one draw with sqrt(L) x stddev.
    if (spec.per_example_noise) stddev *= std::sqrt(static_cast<double>(n));
    Eigen::VectorXd noise(out.grad.size());
    rng.fill_normal(noise, stddev);
    out.grad.values() += noise;
  }
  out.grad.values() /= static_cast<double>(n);
  return out;
}

}  // namespace

void PrivacySpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be >= 0");
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) throw InvalidArgument("clip norm must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (gamma < 1) throw InvalidArgument("gamma must be >= 1");
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "dpsgd") return OptimizerKind::kDpsgd;
  throw InvalidArgument("optimizer must be adam, sgd or dpsgd, got '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kAdam:
      return "adam";
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kDpsgd:
      return "dpsgd";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch size must be positive");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (eval_interval < 1) throw InvalidArgument("evaluation interval must be positive");
}

AdamState AdamState::zeros(const ParamLayout& layout) {
  return AdamState{Eigen::VectorXd::Zero(layout.total()), Eigen::VectorXd::Zero(layout.total()), 0};
}

GradVector clip_gradient(const GradVector& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw InvalidArgument("clip norm must be > 0");
  if (!g.values().allFinite()) throw DivergenceError("divergent gradient");
  const double norm = g.values().norm();
  if (norm <= clip_norm) return g;
  return GradVector(g.layout(), g.values() / (norm / clip_norm));
}

GradVector batch_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                          RowIndices rows) {
  return mean_gradient(model, data, rows).grad;
}

GradVector noisy_batch_gradient(const LanguageModel& model, const ContextWindowDataset& data,
                                RowIndices rows, const PrivacySpec& spec, Rng& rng) {
  return noisy_gradient(model, data, rows, spec, rng).grad;
}

StepResult dpsgd_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                      const PrivacySpec& spec, double learning_rate, Rng& rng,
                      std::optional<double> sampling_rate) {
  if (!(learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  const auto g = noisy_gradient(model, data, rows, spec, rng);
  model.params.values() -= learning_rate * g.grad.values();
  const double q = sampling_rate.value_or(static_cast<double>(rows.size()) /
                                          static_cast<double>(data.size()));
  return StepResult{LedgerEntry{std::min(1.0, q), spec.sigma, 1}, g.loss};
}

void adam_update(ParamVector& params, const GradVector& grad, double learning_rate,
                 AdamState& state, const AdamHyper& hyper) {
  if (grad.layout() != params.layout() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("Adam state, gradient and parameters disagree in layout");
  }
  if (!grad.values().allFinite()) throw DivergenceError("divergent gradient");
  const auto& g = grad.values();
  ++state.step;
  state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * g;
  state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * g.cwiseProduct(g);
  const double m_correction = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double v_correction = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  params.values().array() -= learning_rate * (state.m.array() / m_correction) /
                             ((state.v.array() / v_correction).sqrt() + hyper.epsilon);
}

double adam_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                 double learning_rate, AdamState& state, const AdamHyper& hyper) {
  const auto g = mean_gradient(model, data, rows);
  adam_update(model.params, g.grad, learning_rate, state, hyper);
  return g.loss;
}

double sgd_step(LanguageModel& model, const ContextWindowDataset& data, RowIndices rows,
                double learning_rate) {
  const auto g = mean_gradient(model, data, rows);
  model.params.values() -= learning_rate * g.grad.values();
  return g.loss;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << r.epoch << ',' << r.split << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
  if (!out) throw IoError("failed to write metrics");
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  write_metrics_csv(rows, out);
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ":0: cannot open");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw IoError(path.string() + ":1: expected header '" + std::string(kMetricsHeader) + "'");
  }
  std::vector<MetricRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_list(line, ',');
    if (fields.size() != 5) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    }
    rows.push_back(MetricRow{parse_int64_value(fields[0], "step"),
                             parse_int_value(fields[1], "epoch"), fields[2], fields[3],
                             parse_double_value(fields[4], "value")});
  }
  return rows;
}

TrainResult train(LanguageModel model, const ContextWindowDataset& data,
                  const ContextWindowDataset& dev, const TrainConfig& config,
                  const std::optional<PrivacySpec>& spec) {
  config.validate();
  const bool private_run = config.optimizer == OptimizerKind::kDpsgd;
  if (private_run && !spec) throw InvalidArgument("dpsgd training requires a privacy spec");
  if (spec) spec->validate();

  TrainResult result{std::move(model), {}, PrivacyLedger(), 0, false};
  if (spec && spec->per_example_noise) result.ledger.set_amplification(kPerExampleNoiseTag);
  if (config.epochs == 0) return result;

  const Eigen::Index n = data.size();
  if (config.batch_size > n) {
    throw InvalidArgument("batch size " + std::to_string(config.batch_size) +
                          " exceeds dataset size " + std::to_string(n));
  }
  const double q = static_cast<double>(config.batch_size) / static_cast<double>(n);
  const long long steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const long long total_steps = steps_per_epoch * config.epochs;

  Rng rng(config.seed);
  AdamState adam = AdamState::zeros(result.model.params.layout());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  double loss_sum = 0.0;
  long long loss_count = 0;

  auto record = [&](long long step, int epoch) {
    const double loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count)
                                       : std::numeric_limits<double>::infinity();
    result.metrics.push_back(MetricRow{step, epoch, "train", "loss", loss});
    if (dev.size() > 0) {
      const double pp = result.diverged ? std::numeric_limits<double>::infinity()
                                        : perplexity(result.model, dev);
      result.metrics.push_back(MetricRow{step, epoch, "dev", "perplexity", pp});
    }
    loss_sum = 0.0;
    loss_count = 0;
  };

  long long step = 0;
  for (int epoch = 1; epoch <= config.epochs && !result.diverged; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order.begin(), order.end());
    for (Eigen::Index lo = 0; lo < n; lo += config.batch_size) {
      const auto len = static_cast<std::size_t>(std::min<Eigen::Index>(config.batch_size, n - lo));
      const RowIndices rows(order.data() + lo, len);
      try {
        double loss = 0.0;
        switch (config.optimizer) {
          case OptimizerKind::kAdam:
            loss = adam_step(result.model, data, rows, config.learning_rate, adam);
            break;
          case OptimizerKind::kSgd:
            loss = sgd_step(result.model, data, rows, config.learning_rate);
            break;
          case OptimizerKind::kDpsgd: {
            const auto r = dpsgd_step(result.model, data, rows, *spec, config.learning_rate, rng, q);
            result.ledger.record(r.entry);
            loss = r.loss;
            break;
          }
        }
        loss_sum += loss;
        ++loss_count;
      } catch (const DivergenceError&) {
        result.diverged = true;
      }
      if (result.diverged) {
        record(step, epoch);
        break;
      }
      ++step;
      if (step % config.eval_interval == 0 || step == total_steps) record(step, epoch);
    }
  }
  result.steps = step;
  return result;
}

}  // namespace dpft
