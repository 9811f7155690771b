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
#include <vector>

#include <gtest/gtest.h>

#include "dpft/error.hpp"
#include "dpft/model.hpp"
#include "dpft/network.hpp"
#include "dpft/rng.hpp"

namespace dpft {
namespace {

double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return ((a - b).array().abs() / (a.array().abs() + b.array().abs()).max(1e-8)).maxCoeff();
}

struct RandomNet {
  Architecture arch;
  ParamVector params;
  std::vector<TokenId> context;
  TokenId target = 0;
};

RandomNet random_net(Rng& rng) {
  RandomNet net;
  net.arch.vocab = 5 + static_cast<int>(rng.uniform(0.0, 46.0));
  net.arch.context = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
  net.arch.embedding = 2 + static_cast<int>(rng.uniform(0.0, 3.0));
  const int caps[] = {16, 8, 4};
  const int layers = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
  net.arch.hidden.clear();
  for (int l = 0; l < layers; ++l) net.arch.hidden.push_back(1 + static_cast<int>(rng.uniform(0.0, caps[l])));
  net.params = ParamVector(ParamLayout(net.arch));
  for (Eigen::Index i = 0; i < net.params.size(); ++i) net.params.values()(i) = rng.uniform(-0.8, 0.8);
  for (int p = 0; p < net.arch.context; ++p) {
    net.context.push_back(static_cast<TokenId>(rng.uniform(0.0, net.arch.vocab)));
  }
  net.target = static_cast<TokenId>(rng.uniform(0.0, net.arch.vocab));
  return net;
}

Architecture tiny_arch(int vocab, std::vector<int> hidden, int context = 1, int embedding = 1) {
  Architecture a;
  a.vocab = vocab;
  a.hidden = std::move(hidden);
  a.context = context;
  a.embedding = embedding;
  return a;
}

TEST(Softmax, SumsToOneForExtremeLogits) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd z(37, 3);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.uniform(-700.0, 700.0);
    const Eigen::MatrixXd p = softmax(z);
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      EXPECT_NEAR(p.col(c).sum(), 1.0, 1e-12);
      EXPECT_TRUE((p.col(c).array() >= 0.0).all());
    }
  }
}

TEST(Forward, ZeroParamsAreUniform) {
  const auto arch = tiny_arch(9, {3, 2}, 4, 2);
  const ParamVector zeros(ParamLayout{arch});
  const std::vector<TokenId> ctx{0, 3, 8, 8};
  const Eigen::VectorXd p = forward(zeros, std::span<const TokenId>(ctx), arch);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p(i), 1.0 / 9.0);
  EXPECT_NEAR(example_loss(zeros, std::span<const TokenId>(ctx), 2, arch), std::log(9.0), 1e-15);
}

TEST(Forward, RandomOutputsArePositiveAndNormalized) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = random_net(rng);
    const Eigen::VectorXd p = forward(net.params, std::span<const TokenId>(net.context), net.arch);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_TRUE((p.array() > 0.0).all());
    EXPECT_GE(example_loss(net.params, std::span<const TokenId>(net.context), net.target, net.arch), 0.0);
  }
}

TEST(Forward, HandSetTinyModel) {
  // V = 2, one hidden unit, context 1, embedding 1:
  //   x = E[ctx], h = relu(w x + b), z = u h + c.
  const auto arch = tiny_arch(2, {1});
  ParamVector params{ParamLayout{arch}};
  params.tensor(0) << 0.5, -1.5;         // E
  params.tensor(1) << 2.0;               // w
  params.tensor(2) << 0.25;              // b
  params.tensor(3) << 1.0, -1.0;         // u
  params.tensor(4) << 0.0, 0.5;          // c
  // ctx = 0: h = relu(2 * 0.5 + 0.25) = 1.25; z = (1.25, -0.75).
  // p0 = 1 / (1 + e^{-2}) = 0.8807970779778823.
  const std::vector<TokenId> ctx0{0};
  const Eigen::VectorXd p = forward(params, std::span<const TokenId>(ctx0), arch);
  EXPECT_NEAR(p(0), 0.8807970779778823, 1e-15);
  EXPECT_NEAR(p(1), 0.11920292202211755, 1e-15);
  EXPECT_NEAR(example_loss(params, std::span<const TokenId>(ctx0), 1, arch), 2.1269280110429727, 1e-14);
  // ctx = 1: the hidden unit is dead (2 * -1.5 + 0.25 < 0), z = c.
  const std::vector<TokenId> ctx1{1};
  const Eigen::VectorXd q = forward(params, std::span<const TokenId>(ctx1), arch);
  EXPECT_NEAR(q(1), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
}

TEST(Forward, LayoutMismatchIsAShapeError) {
  const auto arch = tiny_arch(6, {4});
  const auto other = tiny_arch(6, {5});
  const ParamVector params{ParamLayout{other}};
  const std::vector<TokenId> ctx{1};
  try {
    forward(params, std::span<const TokenId>(ctx), arch);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("dense0.weight 4x1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("dense0.weight 5x1"), std::string::npos) << msg;
  }
}

TEST(Forward, LargeTargetLogitDrivesLossToZero) {
  const auto arch = tiny_arch(5, {2});
  ParamVector params{ParamLayout{arch}};
  params.tensor(4)(3, 0) = 800.0;  // output bias
  const std::vector<TokenId> ctx{0};
  EXPECT_LT(example_loss(params, std::span<const TokenId>(ctx), 3, arch), 1e-300);
}

TEST(Gradient, UniformModelOutputBias) {
  const int v = 12;
  const auto arch = tiny_arch(v, {3}, 2, 2);
  const ParamVector zeros{ParamLayout{arch}};
  const std::vector<TokenId> ctx{4, 5};
  const auto g = example_grad(zeros, std::span<const TokenId>(ctx), 7, arch);
  const auto bias = g.tensor(g.layout().slots().size() - 1);
  for (int i = 0; i < v; ++i) {
    EXPECT_DOUBLE_EQ(bias(i, 0), i == 7 ? 1.0 / v - 1.0 : 1.0 / v);
  }
}

TEST(Gradient, UnusedEmbeddingColumnsAreExactlyZero) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_net(rng);
    const auto g = example_grad(net.params, std::span<const TokenId>(net.context), net.target, net.arch);
    const auto emb = g.tensor(0);
    for (TokenId t = 0; t < net.arch.vocab; ++t) {
      if (std::find(net.context.begin(), net.context.end(), t) != net.context.end()) continue;
      EXPECT_TRUE((emb.col(t).array() == 0.0).all());
    }
  }
}

TEST(Gradient, MatchesFiniteDifferencesOnTwoHundredParameterNet) {
  // embedding 2x10 + dense0 10x6 + 10 + output 10x10 + 10 = 200 parameters.
  const Architecture arch = tiny_arch(10, {10}, 3, 2);
  const ParamLayout layout{arch};
  ASSERT_EQ(layout.total(), 200);
  Rng rng(4);
  ParamVector params{layout};
  for (Eigen::Index i = 0; i < params.size(); ++i) params.values()(i) = rng.uniform(-0.8, 0.8);
  const std::vector<TokenId> ctx{3, 7, 3};
  const auto analytic = example_grad(params, std::span<const TokenId>(ctx), 5, arch);
  const auto numeric = finite_diff_grad<long double>(params, std::span<const TokenId>(ctx), 5, arch, 1e-5);
  EXPECT_LE(max_relative_error(analytic.values(), numeric.values()), 1e-5);
}

TEST(Gradient, MatchesFiniteDifferencesOnRandomNets) {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = random_net(rng);
    const std::span<const TokenId> ctx(net.context);
    const auto analytic = example_grad(net.params, ctx, net.target, net.arch);
    const auto numeric = finite_diff_grad<long double>(net.params, ctx, net.target, net.arch, 1e-5);
    const double err = max_relative_error(analytic.values(), numeric.values());
    worst = std::max(worst, err);
    EXPECT_LE(err, 1e-5) << "trial " << trial << " arch " << to_string(net.arch);
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Gradient, CoarseStepDegradesAgreement) {
  Rng rng(6);
  const auto net = random_net(rng);
  const std::span<const TokenId> ctx(net.context);
  const auto analytic = example_grad(net.params, ctx, net.target, net.arch);
  const auto fine = finite_diff_grad<long double>(net.params, ctx, net.target, net.arch, 1e-5);
  const auto coarse = finite_diff_grad<long double>(net.params, ctx, net.target, net.arch, 0.5);
  EXPECT_GT(max_relative_error(analytic.values(), coarse.values()),
            max_relative_error(analytic.values(), fine.values()));
}

TEST(Gradient, BatchedAccumulationEqualsSumOfExampleGradients) {
  Rng rng(7);
  const auto arch = tiny_arch(20, {8, 4}, 3, 3);
  auto model = LanguageModel::initialized(arch, rng);
  ContextMatrix ctx(5, 3);
  TargetVector tgt(5);
  ctx << 1, 2, 3, 4, 4, 4, 0, 0, 9, 19, 18, 17, 5, 6, 5;
  tgt << 4, 5, 6, 7, 8;
  Eigen::VectorXd w(5);
  w << 0.5, 1.0, -2.0, 0.0, 3.0;
  const auto fwd = forward_pass(model.params, arch, ctx);
  const auto bwd = backward_pass(model.params, arch, fwd, tgt);
  GradVector batched{model.params.layout()};
  accumulate_gradient<double>(arch, fwd, bwd, ctx, w, batched);
  const Eigen::VectorXd sq = per_example_sq_norms(arch, fwd, bwd, ctx);

  Eigen::VectorXd expected = Eigen::VectorXd::Zero(batched.size());
  for (Eigen::Index i = 0; i < 5; ++i) {
    std::vector<TokenId> c(ctx.row(i).data(), ctx.row(i).data() + 3);
    const auto g = example_grad(model.params, std::span<const TokenId>(c), tgt(i), arch);
    expected += w(i) * g.values();
    EXPECT_NEAR(sq(i), g.values().squaredNorm(), 1e-12 * (1.0 + sq(i)));
  }
  EXPECT_LE((batched.values() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CentralDifference, QuadraticDerivative) {
  Eigen::VectorXd x(1);
  x << 3.0;
  const auto d = central_difference<double>([](const Eigen::VectorXd& t) { return t(0) * t(0); }, x, 1e-5);
  EXPECT_NEAR(d(0), 6.0, 1e-8);
  EXPECT_THROW(central_difference<double>([](const Eigen::VectorXd&) { return 0.0; }, x, 0.0),
               InvalidArgument);
}

TEST(Determinism, RepeatedCallsAreBitIdentical) {
  Rng rng(8);
  const auto net = random_net(rng);
  const std::span<const TokenId> ctx(net.context);
  const auto a = example_grad(net.params, ctx, net.target, net.arch);
  const auto b = example_grad(net.params, ctx, net.target, net.arch);
  EXPECT_TRUE(a == b);
}

}  // namespace
}  // namespace dpft
