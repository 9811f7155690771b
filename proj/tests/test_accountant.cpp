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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "dpft/accountant.hpp"
#include "dpft/error.hpp"
#include "quadrature_oracle.hpp"

namespace dpft {
namespace {

// Reference values from 40-digit arithmetic (adaptive quadrature and the
// exact binomial sum agree to all printed digits).
constexpr double kRdpQ1e3Sigma11Order8 = 5.198342494843575565e-6;
constexpr double kGaussianEpsilonSigma1 = 5.302585092994045684;  // at order 6
constexpr double kSigmaForEpsilon2 = 1.03201545721095;           // q=1e-3, T=1e5, delta=1e-5

TEST(Rdp, ExactEndpoints) {
  for (double sigma : {0.3, 1.0, 1.1, 4.0}) {
    for (int order : {2, 3, 17, 256}) {
      EXPECT_EQ(rdp_subsampled_gaussian(1.0, sigma, order), order / (2.0 * sigma * sigma));
      EXPECT_EQ(rdp_subsampled_gaussian(0.0, sigma, order), 0.0);
    }
  }
}

TEST(Rdp, Preconditions) {
  EXPECT_THROW(rdp_subsampled_gaussian(1.5, 1.0, 4), InvalidArgument);
  EXPECT_THROW(rdp_subsampled_gaussian(-0.1, 1.0, 4), InvalidArgument);
  EXPECT_THROW(rdp_subsampled_gaussian(0.1, 0.0, 4), InvalidArgument);
  EXPECT_THROW(rdp_subsampled_gaussian(0.1, 1.0, 1), InvalidArgument);
}

TEST(Rdp, FrozenReferenceValue) {
  const double v = rdp_subsampled_gaussian(1e-3, 1.1, 8);
  EXPECT_NEAR(v / kRdpQ1e3Sigma11Order8, 1.0, 1e-10);
  EXPECT_NEAR(oracle::rdp_by_quadrature(1e-3, 1.1, 8) / kRdpQ1e3Sigma11Order8, 1.0, 1e-8);
}

TEST(Rdp, AgreesWithQuadratureOnGrid) {
  for (double q : {1e-4, 1e-3, 1e-2}) {
    for (double sigma : {0.5, 1.1, 2.0, 4.0}) {
      for (int order : {2, 4, 8, 16, 32}) {
        const double a = rdp_subsampled_gaussian(q, sigma, order);
        const double b = oracle::rdp_by_quadrature(q, sigma, order);
        EXPECT_LE(std::abs(a - b), 1e-6 * std::abs(b))
            << "q=" << q << " sigma=" << sigma << " order=" << order << " a=" << a << " b=" << b;
      }
    }
  }
}

TEST(Rdp, SubsamplingNeverExceedsFullBatch) {
  for (double q : {1e-5, 1e-3, 0.1, 0.5, 0.99}) {
    for (double sigma : {0.5, 1.0, 3.0}) {
      for (int order = 2; order <= 256; order += 7) {
        EXPECT_LE(rdp_subsampled_gaussian(q, sigma, order), order / (2.0 * sigma * sigma));
      }
    }
  }
}

TEST(Compose, EmptyLedgerIsZeroCurve) {
  const auto curve = compose(PrivacyLedger{});
  EXPECT_EQ(curve.orders.size(), 255u);
  EXPECT_TRUE((curve.rdp.array() == 0.0).all());
  const auto e = epsilon(curve, 1e-5);
  EXPECT_EQ(e.epsilon, 0.0);
}

TEST(Compose, MergedAndSplitLedgersMatch) {
  PrivacyLedger merged;
  merged.record({0.01, 1.1, 50});
  PrivacyLedger split;
  for (int i = 0; i < 50; ++i) split.record({0.01, 1.1, 1});
  EXPECT_EQ(split.entries().size(), 1u);
  EXPECT_EQ(split.total_steps(), 50);
  const auto a = compose(merged);
  const auto b = compose(split);
  EXPECT_TRUE(a.rdp == b.rdp);
}

TEST(Compose, AdditiveOverConcatenation) {
  PrivacyLedger first, second, both;
  first.record({0.01, 1.1, 30});
  second.record({0.02, 0.8, 7});
  both.append(first);
  both.append(second);
  EXPECT_EQ(both.entries().size(), 2u);
  const Eigen::VectorXd sum = compose(first).rdp + compose(second).rdp;
  EXPECT_LE((compose(both).rdp - sum).cwiseAbs().maxCoeff(), 1e-12 * sum.maxCoeff());
}

TEST(Compose, NonPrivateLedgerIsRejected) {
  PrivacyLedger ledger;
  ledger.record({0.01, 1.0, 3});
  ledger.record({0.01, 0.0, 2});
  EXPECT_FALSE(ledger.is_private());
  EXPECT_THROW(compose(ledger), InvalidArgument);
}

TEST(Ledger, RecordValidationAndSerialization) {
  PrivacyLedger ledger;
  EXPECT_THROW(ledger.record({1.5, 1.0, 1}), InvalidArgument);
  EXPECT_THROW(ledger.record({0.5, -1.0, 1}), InvalidArgument);
  EXPECT_THROW(ledger.record({0.5, 1.0, 0}), InvalidArgument);
  ledger.record({0.001, 1.1, 100});
  ledger.record({0.001, 1.1, 5});
  ledger.record({0.1, 0.1, 2});
  const std::string text = ledger.serialize();
  EXPECT_EQ(text, "0.001:1.1:105;0.1:0.1:2");
  EXPECT_EQ(PrivacyLedger::deserialize(text, kSampledGaussianTag), ledger);
}

TEST(Epsilon, GaussianClosedFormSigmaOne) {
  PrivacyLedger ledger;
  ledger.record({1.0, 1.0, 1});
  const auto e = epsilon(compose(ledger), 1e-5);
  EXPECT_EQ(e.order, 6);
  EXPECT_NEAR(e.epsilon, kGaussianEpsilonSigma1, 1e-13);
}

TEST(Epsilon, TiesGoToSmallerOrder) {
  // With L = log(1 / delta): order 2 gives L/2 + L and order 3 gives L + L/2,
  // the same floating-point sum.
  const double l = std::log(1.0 / 0.5);
  const RdpCurve curve{{2, 3}, Eigen::Vector2d(0.5 * l, l)};
  const auto e = epsilon(curve, 0.5);
  EXPECT_EQ(e.order, 2);
  EXPECT_EQ(e.epsilon, 0.5 * l + l);
}

TEST(Epsilon, DeltaTowardOneApproachesMinimumRdp) {
  PrivacyLedger ledger;
  ledger.record({0.01, 1.0, 1000});
  const auto curve = compose(ledger);
  const double floor = curve.rdp.minCoeff();
  double previous = std::numeric_limits<double>::infinity();
  for (double delta : {0.1, 0.5, 0.9, 0.99, 0.999999}) {
    const double e = epsilon(curve, delta).epsilon;
    EXPECT_GE(e, floor);
    EXPECT_LE(e, previous);
    previous = e;
  }
  EXPECT_NEAR(previous, floor, 1e-5);
}

TEST(Epsilon, InvalidDelta) {
  const auto curve = compose(PrivacyLedger{});
  EXPECT_THROW(epsilon(curve, 0.0), InvalidArgument);
  EXPECT_THROW(epsilon(curve, 1.0), InvalidArgument);
  EXPECT_THROW(epsilon(RdpCurve{}, 0.5), InvalidArgument);
}

TEST(Epsilon, MonotoneInSigmaStepsAndRate) {
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.5, 0.8, 1.1, 2.0, 4.0}) {
    const double e = epsilon_for(1e-3, sigma, 100000, 1e-5).epsilon;
    EXPECT_LT(e, previous);
    previous = e;
  }
  previous = 0.0;
  for (long long t : {1LL, 10LL, 1000LL, 100000LL}) {
    const double e = epsilon_for(1e-3, 1.1, t, 1e-5).epsilon;
    EXPECT_GE(e, previous);
    previous = e;
  }
  previous = 0.0;
  for (double q : {1e-4, 1e-3, 1e-2, 1e-1}) {
    const double e = epsilon_for(q, 1.1, 1000, 1e-5).epsilon;
    EXPECT_GE(e, previous);
    previous = e;
  }
}

TEST(GroupRescale, Examples) {
  EXPECT_EQ(group_rescale(9.75, 1), 9.75);
  EXPECT_EQ(group_rescale(9.75, 3), 3.25);
  EXPECT_EQ(group_rescale(0.0, 7), 0.0);
  EXPECT_THROW(group_rescale(1.0, 0), InvalidArgument);
  const double e = epsilon_for(1e-3, 1.1, 1000, 1e-5).epsilon;
  EXPECT_EQ(group_rescale(e, 1), e);
}

TEST(Calibrate, RecoversKnownSigma) {
  for (double sigma : {0.7, 1.1, 2.5}) {
    const double target = epsilon_for(1e-2, sigma, 1000, 1e-5).epsilon;
    const double found = calibrate_sigma(target, 1e-5, 1e-2, 1000);
    EXPECT_NEAR(found, sigma, 1e-3) << sigma;
    EXPECT_LE(epsilon_for(1e-2, found, 1000, 1e-5).epsilon, target);
  }
}

TEST(Calibrate, MoreStepsNeedMoreNoise) {
  const double a = calibrate_sigma(3.0, 1e-5, 1e-2, 100);
  const double b = calibrate_sigma(3.0, 1e-5, 1e-2, 10000);
  EXPECT_GT(b, a);
}

TEST(Calibrate, FrozenTargetEpsilonTwo) {
  const double found = calibrate_sigma(2.0, 1e-5, 1e-3, 100000);
  EXPECT_GE(found, kSigmaForEpsilon2 - 1e-9);
  EXPECT_LE(found, kSigmaForEpsilon2 + 1e-3);
  EXPECT_LE(epsilon_for(1e-3, found, 100000, 1e-5).epsilon, 2.0);
  // The same check against quadrature-derived log-moments.
  const auto around = [&](double sigma) {
    double best = std::numeric_limits<double>::infinity();
    for (int order = 2; order <= 40; ++order) {
      const double rdp = 100000.0 * oracle::rdp_by_quadrature(1e-3, sigma, order);
      best = std::min(best, rdp + std::log(1.0 / 1e-5) / (order - 1));
    }
    return best;
  };
  EXPECT_LE(around(found), 2.0 + 1e-6);
  EXPECT_GT(around(found - 2e-3), 2.0);
}

TEST(Calibrate, Unreachable) {
  try {
    calibrate_sigma(1e-9, 1e-5, 1.0, 100000);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "target epsilon unreachable");
  }
  EXPECT_THROW(calibrate_sigma(0.0, 1e-5, 0.1, 10), InvalidArgument);
}

}  // namespace
}  // namespace dpft
