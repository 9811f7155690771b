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

#include "dpft/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpft/error.hpp"
#include "dpft/keyvalue.hpp"

namespace dpft {
namespace {

constexpr double kSigmaLow = 1e-2;
constexpr double kSigmaHigh = 1e3;
constexpr double kSigmaTolerance = 1e-3;

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void PrivacyLedger::record(const LedgerEntry& entry) {
  if (!(entry.q >= 0.0 && entry.q <= 1.0)) throw InvalidArgument("sampling rate must lie in [0, 1]");
  if (!(entry.sigma >= 0.0)) throw InvalidArgument("noise multiplier must be non-negative");
  if (entry.steps < 1) throw InvalidArgument("step count must be positive");
  if (!entries_.empty() && entries_.back().q == entry.q && entries_.back().sigma == entry.sigma) {
    entries_.back().steps += entry.steps;
  } else {
    entries_.push_back(entry);
  }
}

void PrivacyLedger::append(const PrivacyLedger& other) {
  for (const auto& e : other.entries_) record(e);
}

bool PrivacyLedger::is_private() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.sigma > 0.0; });
}

long long PrivacyLedger::total_steps() const {
  long long total = 0;
  for (const auto& e : entries_) total += e.steps;
  return total;
}

std::string PrivacyLedger::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ';';
    out += format_double(entries_[i].q) + ':' + format_double(entries_[i].sigma) + ':' +
           std::to_string(entries_[i].steps);
  }
  return out;
}

PrivacyLedger PrivacyLedger::deserialize(std::string_view text, std::string amplification) {
  PrivacyLedger ledger(std::move(amplification));
  for (const auto& item : split_list(text, ';')) {
    const auto fields = split_list(item, ':');
    if (fields.size() != 3) throw InvalidArgument("ledger entry '" + item + "' is not q:sigma:steps");
    ledger.record(LedgerEntry{parse_double_value(fields[0], "ledger q"),
                              parse_double_value(fields[1], "ledger sigma"),
                              parse_int64_value(fields[2], "ledger steps")});
  }
  return ledger;
}

std::vector<int> default_orders() {
  std::vector<int> orders;
  for (int order = kMinOrder; order <= kMaxOrder; ++order) orders.push_back(order);
  return orders;
}

double rdp_subsampled_gaussian(double q, double sigma, int order) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("sampling rate must lie in [0, 1]");
  if (!(sigma > 0.0)) throw InvalidArgument("noise multiplier must be positive");
  if (order < kMinOrder) throw InvalidArgument("order must be an integer >= 2");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return order / (2.0 * sigma * sigma);

  // A = sum_j C(order, j) q^j (1-q)^(order-j) exp(j (j-1) / (2 sigma^2)) is the
  // binomial expansion of E_{mu0}[(mu / mu0)^order], using
  // E_{mu0}[exp(j (2x - 1) / (2 sigma^2))] = exp(j (j-1) / (2 sigma^2)).
  // The binomial weights sum to one, so A - 1 keeps only the j >= 2 terms,
  // each weighted by expm1(.) > 0; summing those avoids cancellation when
  // the divergence is tiny.
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  Eigen::VectorXd terms(order - 1);
  for (int j = 2; j <= order; ++j) {
    const double c = static_cast<double>(j) * (j - 1) * inv_two_var;
    const double log_expm1 = c > 40.0 ? c + std::log1p(-std::exp(-c)) : std::log(std::expm1(c));
    terms(j - 2) = log_binomial(order, j) + j * log_q + (order - j) * log_1mq + log_expm1;
  }
  const double m = terms.maxCoeff();
  const double log_a_minus_1 = m + std::log((terms.array() - m).exp().sum());
  const double log_a = log_a_minus_1 > 0.0
                           ? log_a_minus_1 + std::log1p(std::exp(-log_a_minus_1))
                           : std::log1p(std::exp(log_a_minus_1));
  return log_a / (order - 1);
}

RdpCurve compose(const PrivacyLedger& ledger, std::span<const int> orders) {
  if (!ledger.is_private()) {
    throw InvalidArgument("ledger contains noiseless (sigma = 0) steps; epsilon is undefined");
  }
  RdpCurve curve;
  curve.orders.assign(orders.begin(), orders.end());
  curve.rdp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(orders.size()));
  for (const auto& entry : ledger.entries()) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      curve.rdp(static_cast<Eigen::Index>(i)) +=
          static_cast<double>(entry.steps) * rdp_subsampled_gaussian(entry.q, entry.sigma, orders[i]);
    }
  }
  return curve;
}

RdpCurve compose(const PrivacyLedger& ledger) {
  const auto orders = default_orders();
  return compose(ledger, orders);
}

EpsilonResult epsilon(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (curve.orders.empty() || curve.rdp.size() != static_cast<Eigen::Index>(curve.orders.size())) {
    throw InvalidArgument("empty or malformed RDP curve");
  }
  if ((curve.rdp.array() == 0.0).all()) return EpsilonResult{0.0, curve.orders.front()};

  EpsilonResult best{std::numeric_limits<double>::infinity(), curve.orders.front()};
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const int order = curve.orders[i];
    const double eps = curve.rdp(static_cast<Eigen::Index>(i)) + log_inv_delta / (order - 1);
    if (eps < best.epsilon) best = EpsilonResult{eps, order};
  }
  return best;
}

double group_rescale(double epsilon, int gamma) {
  if (gamma < 1) throw InvalidArgument("gamma must be a positive integer");
  return epsilon / gamma;
}

EpsilonResult epsilon_for(double q, double sigma, long long steps, double delta) {
  PrivacyLedger ledger;
  ledger.record(LedgerEntry{q, sigma, steps});
  return epsilon(compose(ledger), delta);
}

double calibrate_sigma(double target_epsilon, double delta, double q, long long steps) {
  if (!(target_epsilon > 0.0)) throw InvalidArgument("target epsilon must be positive");
  auto eps = [&](double sigma) { return epsilon_for(q, sigma, steps, delta).epsilon; };
  if (eps(kSigmaHigh) > target_epsilon) throw InvalidArgument("target epsilon unreachable");
  if (eps(kSigmaLow) <= target_epsilon) return kSigmaLow;
  double lo = kSigmaLow;  // eps(lo) > target
  double hi = kSigmaHigh;  // eps(hi) <= target
  while (hi - lo > kSigmaTolerance) {
    const double mid = 0.5 * (lo + hi);
    (eps(mid) <= target_epsilon ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace dpft
