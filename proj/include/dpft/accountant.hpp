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

// Moments (Renyi) accountant for composed subsampled Gaussian mechanisms.
//
// Each training step releases a clipped gradient sum plus N(0, sigma^2 C^2)
// noise over a batch drawn at rate q. Its log-moment at integer order
// lambda is log E[(mu(x) / mu0(x))^lambda] under x ~ mu0, where
// mu0 = N(0, sigma^2) and mu = (1 - q) mu0 + q N(1, sigma^2). Log-moments add
// under composition, and the total converts to (epsilon, delta) through
//   epsilon = min_lambda  rdp(lambda) + log(1 / delta) / (lambda - 1).
//
// The conversion above is the classical one; newer converters give tighter
// epsilons, so values here are valid but possibly loose upper bounds.

#ifndef DPFT_ACCOUNTANT_HPP_
#define DPFT_ACCOUNTANT_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dpft {

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 256;
inline constexpr const char* kSampledGaussianTag = "sampled-Gaussian, q=L/N";

struct LedgerEntry {
  double q = 0.0;
  double sigma = 0.0;
  long long steps = 0;

  bool operator==(const LedgerEntry&) const = default;
};

// Steps consumed by a private run. Consecutive entries with equal (q, sigma)
// are merged as they are appended.
class PrivacyLedger {
 public:
  PrivacyLedger() = default;
  explicit PrivacyLedger(std::string amplification) : amplification_(std::move(amplification)) {}

  // Throws InvalidArgument unless 0 <= q <= 1, sigma >= 0 and steps >= 1.
  // sigma = 0 marks a non-private step.
  void record(const LedgerEntry& entry);
  void append(const PrivacyLedger& other);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  long long total_steps() const;
  // False when any step ran without noise.
  bool is_private() const;
  const std::string& amplification() const { return amplification_; }
  void set_amplification(std::string tag) { amplification_ = std::move(tag); }

  // "q:sigma:steps" items joined by ';'.
  std::string serialize() const;
  static PrivacyLedger deserialize(std::string_view text, std::string amplification);

  bool operator==(const PrivacyLedger&) const = default;

 private:
  std::vector<LedgerEntry> entries_;
  std::string amplification_ = kSampledGaussianTag;
};

// Cumulative Renyi divergence per order.
struct RdpCurve {
  std::vector<int> orders;
  Eigen::VectorXd rdp;
};

std::vector<int> default_orders();

// Per-step Renyi divergence at integer order >= 2, from the binomial
// expansion of the log-moment summed in log space. q = 0 gives 0 and q = 1
// gives lambda / (2 sigma^2) exactly.
double rdp_subsampled_gaussian(double q, double sigma, int order);

// Throws when the ledger holds non-private steps.
RdpCurve compose(const PrivacyLedger& ledger, std::span<const int> orders);
RdpCurve compose(const PrivacyLedger& ledger);

struct EpsilonResult {
  double epsilon = 0.0;
  int order = 0;
};

// Minimizing order; ties go to the smaller order. A curve that is zero at
// every order (nothing released) yields epsilon = 0.
EpsilonResult epsilon(const RdpCurve& curve, double delta);

double group_rescale(double epsilon, int gamma);

// Epsilon of T steps at (q, sigma) over the default orders.
EpsilonResult epsilon_for(double q, double sigma, long long steps, double delta);

// Smallest sigma (bisection, tolerance 1e-3) whose epsilon is <= target.
// Throws "target epsilon unreachable" when sigma = 1e3 does not reach it.
double calibrate_sigma(double target_epsilon, double delta, double q, long long steps);

}  // namespace dpft

#endif  // DPFT_ACCOUNTANT_HPP_
