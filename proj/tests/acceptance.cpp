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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dpft/accountant.hpp"
#include "dpft/corpus.hpp"
#include "dpft/experiment.hpp"
#include "dpft/model.hpp"
#include "dpft/network.hpp"
#include "dpft/optimizer.hpp"
#include "dpft/rng.hpp"
#include "dpft/synthetic.hpp"
#include "quadrature_oracle.hpp"

namespace {

using namespace dpft;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Criterion 1 -------------------------------------------------------------

double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return ((a - b).array().abs() / (a.array().abs() + b.array().abs()).max(1e-8)).maxCoeff();
}

Verdict gradient_correctness() {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Architecture arch;
    arch.vocab = 5 + static_cast<int>(rng.uniform(0.0, 46.0));
    arch.context = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
    arch.embedding = 2 + static_cast<int>(rng.uniform(0.0, 3.0));
    const int caps[] = {16, 8, 4};
    const int layers = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    arch.hidden.clear();
    for (int l = 0; l < layers; ++l) arch.hidden.push_back(1 + static_cast<int>(rng.uniform(0.0, caps[l])));
    ParamVector params{ParamLayout{arch}};
    for (Eigen::Index i = 0; i < params.size(); ++i) params.values()(i) = rng.uniform(-0.8, 0.8);
    std::vector<TokenId> ctx;
    for (int p = 0; p < arch.context; ++p) ctx.push_back(static_cast<TokenId>(rng.uniform(0.0, arch.vocab)));
    const auto target = static_cast<TokenId>(rng.uniform(0.0, arch.vocab));
    const std::span<const TokenId> c(ctx);
    const auto analytic = example_grad(params, c, target, arch);
    const auto numeric = finite_diff_grad<long double>(params, c, target, arch, 1e-5);
    worst = std::max(worst, max_relative_error(analytic.values(), numeric.values()));
  }
  return {worst <= 1e-5, "max relative error " + fmt(worst)};
}

// Criterion 2 -------------------------------------------------------------

Verdict clipping_contract() {
  Rng rng(102);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_cos = 1.0;
  long long passthrough = 0;
  long long passthrough_exact = 0;
  for (double c : {0.1, 1.0, 10.0}) {
    for (int i = 0; i < 10000; ++i) {
      // Any layout serves as a container; its extent is 3 V + 2.
      Architecture shape;
      shape.vocab = 1 + static_cast<int>(rng.uniform(0.0, 20.0));
      shape.context = 1;
      shape.embedding = 1;
      shape.hidden = {1};
      const ParamLayout layout(shape);
      const Eigen::Index n = layout.total();
      // Scales spread over four decades around C, so both branches are hit.
      const double scale = c * std::pow(10.0, rng.uniform(-2.0, 2.0)) / std::sqrt(static_cast<double>(n));
      Eigen::VectorXd v(n);
      for (Eigen::Index j = 0; j < n; ++j) v(j) = scale * rng.normal();
      const GradVector g{layout, v};
      const Eigen::VectorXd out = clip_gradient(g, c).values();
      const double in_norm = v.norm();
      worst_excess = std::max(worst_excess, out.norm() - c);
      if (in_norm <= c) {
        ++passthrough;
        if ((out.array() == v.array()).all()) ++passthrough_exact;
      }
      if (in_norm > 0.0) worst_cos = std::min(worst_cos, out.dot(v) / (out.norm() * in_norm));
    }
  }
  const bool pass = worst_excess <= 1e-12 && passthrough_exact == passthrough && passthrough > 0 &&
                    worst_cos >= 1.0 - 1e-12;
  return {pass, "max |out|-C " + fmt(worst_excess) + ", pass-through " + std::to_string(passthrough_exact) +
                    "/" + std::to_string(passthrough) + ", min cosine " + fmt(worst_cos)};
}

// Criterion 3 -------------------------------------------------------------

Verdict noise_unbiasedness() {
  Rng rng(103);
  Architecture arch;
  arch.vocab = 12;
  arch.context = 3;
  arch.embedding = 3;
  arch.hidden = {6, 4};
  const auto model = LanguageModel::initialized(arch, rng);
  std::vector<Sentence> sentences;
  for (int s = 0; s < 4; ++s) {
    Sentence sent;
    for (int j = 0; j < 3; ++j) sent.push_back(4 + static_cast<TokenId>(rng.uniform(0.0, 8.0)));
    sent.push_back(kEos);
    sentences.push_back(sent);
  }
  const auto data = windows(sentences, arch.context);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < 10; ++r) rows.push_back(r);

  PrivacySpec spec;
  spec.sigma = 1.0;
  spec.clip_norm = 1.0;
  PrivacySpec clean = spec;
  clean.sigma = 0.0;
  Rng unused(0);
  const Eigen::VectorXd reference = noisy_batch_gradient(model, data, rows, clean, unused).values();

  const int draws = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(reference.size());
  Rng noise(104);
  for (int d = 0; d < draws; ++d) sum += noisy_batch_gradient(model, data, rows, spec, noise).values();
  const double bound = 4.0 * (spec.sigma * spec.clip_norm / 10.0) / std::sqrt(static_cast<double>(draws));
  const double worst = (sum / draws - reference).cwiseAbs().maxCoeff();
  return {worst < bound, std::to_string(reference.size()) + " coordinates, max deviation " + fmt(worst) +
                             " < " + fmt(bound)};
}

// Criterion 4 -------------------------------------------------------------

Verdict accountant_oracle() {
  double worst = 0.0;
  for (double q : {1e-4, 1e-3, 1e-2}) {
    for (double sigma : {0.5, 1.1, 2.0, 4.0}) {
      for (int order : {2, 4, 8, 16, 32}) {
        const double a = rdp_subsampled_gaussian(q, sigma, order);
        const double b = oracle::rdp_by_quadrature(q, sigma, order);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
    }
  }
  return {worst <= 1e-6, "max relative difference " + fmt(worst)};
}

// Criterion 5 -------------------------------------------------------------

Verdict gaussian_closed_form() {
  int checked = 0;
  int exact = 0;
  for (double sigma : {0.3, 0.5, 1.0, 1.1, 2.0, 4.0, 10.0}) {
    for (double delta : {1e-7, 1e-5, 1e-3, 0.1}) {
      double best = std::numeric_limits<double>::infinity();
      for (int l = 2; l <= 256; ++l) {
        best = std::min(best, l / (2.0 * sigma * sigma) + std::log(1.0 / delta) / (l - 1));
      }
      ++checked;
      if (epsilon_for(1.0, sigma, 1, delta).epsilon == best) ++exact;
    }
  }
  return {exact == checked, std::to_string(exact) + "/" + std::to_string(checked) + " bit-exact"};
}

// Criterion 6 -------------------------------------------------------------

Verdict noise_tightens_guarantee() {
  std::vector<double> by_sigma;
  for (double sigma : {0.5, 1.1, 2.0, 4.0}) by_sigma.push_back(epsilon_for(1e-3, sigma, 100000, 1e-5).epsilon);
  bool decreasing = true;
  for (std::size_t i = 1; i < by_sigma.size(); ++i) decreasing = decreasing && by_sigma[i] < by_sigma[i - 1];

  bool delta_monotone = true;
  for (double sigma : {0.5, 1.1, 2.0, 4.0}) {
    double previous = -1.0;
    for (double delta : {1e-3, 1e-5, 1e-7}) {  // increasing 1/delta
      const double e = epsilon_for(1e-3, sigma, 100000, delta).epsilon;
      delta_monotone = delta_monotone && e >= previous;
      previous = e;
    }
  }
  std::string detail = "epsilon(sigma) =";
  for (double e : by_sigma) detail += " " + fmt(e);
  return {decreasing && delta_monotone, detail};
}

// Criterion 7 -------------------------------------------------------------

Verdict group_rescaling() {
  bool pass = true;
  for (double sigma : {0.7, 1.1, 3.0}) {
    const double e = epsilon_for(1e-2, sigma, 5000, 1e-5).epsilon;
    pass = pass && group_rescale(e, 1) == e;
    for (int gamma : {1, 2, 10}) pass = pass && group_rescale(e, gamma) == e / gamma;
  }
  PrivacyLedger ledger;
  ledger.record({1e-2, 1.1, 5000});
  for (int gamma : {1, 2, 10}) {
    PrivacySpec spec;
    spec.gamma = gamma;
    const auto r = make_epsilon_report(ledger, spec);
    pass = pass && r.epsilon_group == r.epsilon / gamma;
  }
  return {pass, "gamma in {1, 2, 10}"};
}

// Criteria 8 and 9 --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

class DeskRuns {
 public:
  explicit DeskRuns(fs::path root) : root_(std::move(root)) {
    fs::remove_all(root_);
    fs::create_directories(root_);
    SyntheticOptions o;
    o.words = 496;
    o.public_sentences = 1000;
    o.private_sentences = 300;
    o.seed = 1;
    const auto corpora = make_synthetic_corpora(o);
    write_lines(root_ / "public.txt", corpora.public_lines);
    write_lines(root_ / "private.txt", corpora.private_lines);
  }
  ~DeskRuns() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }

  ExperimentConfig config(std::uint64_t seed, const std::string& out) const {
    auto c = ExperimentConfig::defaults("small");
    c.base_dir = root_;
    c.public_corpus = "public.txt";
    c.private_corpus = "private.txt";
    c.output_dir = out;
    c.min_count = 1;
    c.preset = "custom";
    c.hidden = {64, 32, 16};
    c.seed = seed;
    c.eval_interval = 100;
    c.dp_scratch = true;
    c.pretrain.batch_size = 64;
    c.finetune.batch_size = 64;
    c.private_train.batch_size = 32;
    c.private_train.learning_rate = 0.1;
    c.privacy->sigma = 0.1;
    c.privacy->clip_norm = 1.0;
    c.privacy->delta = 1e-5;
    return c;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
};

double test_pp(const RunResult& r, const char* stage) {
  for (std::size_t i = 0; i < r.manifest.stages.size(); ++i) {
    if (r.manifest.stages[i].name == stage) return r.outcomes[i].test_perplexity;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Verdict desk_ordering(const DeskRuns& desk, RunResult& first_seed) {
  int satisfied = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto result = run_schema(desk.config(seed, "seed" + std::to_string(seed)));
    const double pub = test_pp(result, kStagePublicOnly);
    const double ft = test_pp(result, kStageFinetune);
    const double dp = test_pp(result, kStageDpFinetune);
    const double scratch = test_pp(result, kStageDpScratch);
    const bool a = ft < pub;
    const bool b = dp < pub;
    const bool c = std::isinf(scratch) || scratch > dp;
    if (a && b && c) ++satisfied;
    const auto* dp_stage = result.manifest.find(kStageDpFinetune);
    detail += "\n    seed " + std::to_string(seed) + ": public " + fmt(pub) + ", private " +
              fmt(test_pp(result, kStagePrivateOnly)) + ", finetune " + fmt(ft) + ", dp_finetune " + fmt(dp) +
              ", dp_scratch " + fmt(scratch) + " (a=" + (a ? "1" : "0") + " b=" + (b ? "1" : "0") +
              " c=" + (c ? "1" : "0") + ")";
    if (dp_stage != nullptr && dp_stage->epsilon) detail += " " + dp_stage->epsilon->line();
    if (seed == 1) first_seed = std::move(result);
  }
  return {satisfied >= 2, std::to_string(satisfied) + "/3 seeds satisfy (a), (b) and (c)" + detail};
}

Verdict determinism(const DeskRuns& desk, const RunResult& first) {
  if (first.manifest.stages.empty()) return {false, "first seed did not run"};
  const auto again = run_schema(desk.config(1, "seed1_rerun"));
  int files = 0;
  int identical = 0;
  for (std::size_t i = 0; i < first.manifest.stages.size(); ++i) {
    const auto& a = first.manifest.stages[i];
    const auto& b = again.manifest.stages[i];
    for (const auto& [pa, pb] : {std::pair{a.metrics, b.metrics}, std::pair{a.checkpoint, b.checkpoint}}) {
      ++files;
      if (slurp(first.manifest.resolve(pa)) == slurp(again.manifest.resolve(pb))) ++identical;
    }
  }
  return {identical == files && files > 0, std::to_string(identical) + "/" + std::to_string(files) +
                                               " metrics and checkpoint files byte-identical"};
}

// Criterion 10 ------------------------------------------------------------

Verdict uniform_perplexity() {
  Rng rng(110);
  double worst = 0.0;
  for (int v : {10, 100, 1000}) {
    Architecture arch;
    arch.vocab = v;
    arch.context = 5;
    arch.embedding = 4;
    arch.hidden = {8, 4};
    std::vector<Sentence> sentences;
    for (int s = 0; s < 50; ++s) {
      Sentence sent;
      const int len = 1 + static_cast<int>(rng.uniform(0.0, 12.0));
      for (int j = 0; j < len; ++j) sent.push_back(4 + static_cast<TokenId>(rng.uniform(0.0, v - 4.0)));
      sent.push_back(kEos);
      sentences.push_back(sent);
    }
    const double pp = perplexity(LanguageModel::zeros(arch), windows(sentences, arch.context));
    worst = std::max(worst, std::abs(pp - v) / v);
  }
  return {worst <= 1e-9, "max relative error " + fmt(worst)};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const std::string& name, double limit_seconds, const std::function<Verdict()>& check) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = limit_seconds <= 0.0 || seconds < limit_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::cout << "criterion " << id << " " << name << ": " << (pass ? "PASS" : "FAIL") << " (" << v.detail
              << "; " << fmt(seconds) << " s" << (in_time ? "" : ", over time limit") << ")" << std::endl;
  };

  report(1, "gradient correctness", 30, gradient_correctness);
  report(2, "clipping contract", 5, clipping_contract);
  report(3, "noise unbiasedness", 60, noise_unbiasedness);
  report(4, "accountant oracle equivalence", 60, accountant_oracle);
  report(5, "gaussian closed form", 1, gaussian_closed_form);
  report(6, "more noise tightens epsilon", 120, noise_tightens_guarantee);
  report(7, "group rescaling", 1, group_rescaling);

  const DeskRuns desk(fs::temp_directory_path() / "dpft_acceptance_desk");
  RunResult first_seed;
  report(8, "desk-scale ordering", 15 * 60, [&] { return desk_ordering(desk, first_seed); });
  report(9, "determinism", 0, [&] { return determinism(desk, first_seed); });
  report(10, "uniform perplexity", 0, uniform_perplexity);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
