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

// Dense kernels for the feedforward language model: batched forward pass,
// softmax cross-entropy, exact backpropagation, per-example gradient norms,
// and a central-difference oracle.
//
// Everything is templated on the scalar type so the oracle can run in
// extended precision against the double-precision kernels. A batch is laid
// out column-wise: column i of every activation matrix belongs to example i.

#ifndef DPFT_NETWORK_HPP_
#define DPFT_NETWORK_HPP_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpft/corpus.hpp"
#include "dpft/error.hpp"
#include "dpft/params.hpp"

namespace dpft {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// log(sum(exp(x))) with max shifting.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using std::exp;
  using std::log;
  const auto m = x.maxCoeff();
  if (!std::isfinite(static_cast<double>(m))) return m;
  return m + log((x.array() - m).exp().sum());
}

// Column-wise softmax with max shifting.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar m = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - m).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

template <typename Scalar>
struct ForwardPass {
  Matrix<Scalar> input;                // (k * embedding) x B, concatenated embeddings
  std::vector<Matrix<Scalar>> hidden;  // post-ReLU activations, one per hidden layer
  Matrix<Scalar> logits;               // vocab x B

  // Input of dense layer `layer` (the output layer is index hidden.size()).
  const Matrix<Scalar>& layer_input(std::size_t layer) const {
    return layer == 0 ? input : hidden[layer - 1];
  }
};

template <typename Scalar>
struct BackwardPass {
  // dLoss/d(pre-activation) of each dense layer, output layer last.
  std::vector<Matrix<Scalar>> deltas;
  // dLoss/d(input), (k * embedding) x B.
  Matrix<Scalar> input_grad;
};

namespace detail {

inline void check_contexts(const Eigen::Ref<const ContextMatrix>& contexts,
                           const Architecture& arch) {
  if (contexts.cols() != arch.context) {
    throw ShapeError("context width " + std::to_string(contexts.cols()) + " does not match " +
                     "architecture context length " + std::to_string(arch.context));
  }
  if (contexts.size() > 0 && (contexts.minCoeff() < 0 || contexts.maxCoeff() >= arch.vocab)) {
    throw InvalidArgument("context token id outside [0, " + std::to_string(arch.vocab) + ")");
  }
}

inline void check_targets(const Eigen::Ref<const TargetVector>& targets, const Architecture& arch) {
  if (targets.size() > 0 && (targets.minCoeff() < 0 || targets.maxCoeff() >= arch.vocab)) {
    throw InvalidArgument("target token id outside [0, " + std::to_string(arch.vocab) + ")");
  }
}

}  // namespace detail

template <typename Scalar>
ForwardPass<Scalar> forward_pass(const BasicParamVector<Scalar>& params, const Architecture& arch,
                                 const Eigen::Ref<const ContextMatrix>& contexts) {
  check_layout(params.layout(), arch);
  detail::check_contexts(contexts, arch);
  const Eigen::Index batch = contexts.rows();
  const Eigen::Index d = arch.embedding;

  ForwardPass<Scalar> fwd;
  const auto embedding = params.tensor(0);
  fwd.input.resize(arch.input_width(), batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (Eigen::Index p = 0; p < arch.context; ++p) {
      fwd.input.col(i).segment(p * d, d) = embedding.col(contexts(i, p));
    }
  }

  fwd.hidden.reserve(arch.hidden.size());
  for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
    const auto w = params.tensor(1 + 2 * l);
    const auto b = params.tensor(2 + 2 * l);
    Matrix<Scalar> z = w * fwd.layer_input(l);
    z.colwise() += b.col(0);
    fwd.hidden.push_back(z.cwiseMax(Scalar(0)));
  }
  const std::size_t out = arch.hidden.size();
  fwd.logits = params.tensor(1 + 2 * out) * fwd.hidden.back();
  fwd.logits.colwise() += params.tensor(2 + 2 * out).col(0);
  return fwd;
}

// -log p(target | context) for every column, computed as lse(z) - z_target,
// which is non-negative in floating point.
template <typename Scalar>
Vector<Scalar> example_nll(const ForwardPass<Scalar>& fwd,
                           const Eigen::Ref<const TargetVector>& targets) {
  Vector<Scalar> nll(fwd.logits.cols());
  for (Eigen::Index i = 0; i < nll.size(); ++i) {
    nll(i) = log_sum_exp(fwd.logits.col(i)) - fwd.logits(targets(i), i);
  }
  return nll;
}

template <typename Scalar>
BackwardPass<Scalar> backward_pass(const BasicParamVector<Scalar>& params,
                                   const Architecture& arch, const ForwardPass<Scalar>& fwd,
                                   const Eigen::Ref<const TargetVector>& targets) {
  detail::check_targets(targets, arch);
  const std::size_t layers = arch.hidden.size() + 1;
  BackwardPass<Scalar> bwd;
  bwd.deltas.resize(layers);

  Matrix<Scalar> delta = softmax(fwd.logits);
  for (Eigen::Index i = 0; i < delta.cols(); ++i) delta(targets(i), i) -= Scalar(1);
  for (std::size_t l = layers; l-- > 0;) {
    Matrix<Scalar> upstream = params.tensor(1 + 2 * l).transpose() * delta;
    bwd.deltas[l] = std::move(delta);
    if (l == 0) {
      bwd.input_grad = std::move(upstream);
    } else {
      delta = upstream.cwiseProduct(
          (fwd.hidden[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
  }
  return bwd;
}

// Squared l2 norm of each example's full parameter gradient, without
// materializing it: a dense layer contributes |delta|^2 (|input|^2 + 1), and
// the embedding contributes the norm of each touched column, with repeated
// tokens in one context summed before squaring.
template <typename Scalar>
Vector<Scalar> per_example_sq_norms(const Architecture& arch, const ForwardPass<Scalar>& fwd,
                                    const BackwardPass<Scalar>& bwd,
                                    const Eigen::Ref<const ContextMatrix>& contexts) {
  const Eigen::Index batch = contexts.rows();
  const Eigen::Index d = arch.embedding;
  Vector<Scalar> sq = Vector<Scalar>::Zero(batch);
  for (std::size_t l = 0; l < bwd.deltas.size(); ++l) {
    const auto delta_sq = bwd.deltas[l].colwise().squaredNorm();
    const auto input_sq = fwd.layer_input(l).colwise().squaredNorm();
    sq += (delta_sq.array() * (input_sq.array() + Scalar(1))).matrix().transpose();
  }
  Vector<Scalar> column(d);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (Eigen::Index p = 0; p < arch.context; ++p) {
      const TokenId token = contexts(i, p);
      bool seen = false;
      for (Eigen::Index q = 0; q < p && !seen; ++q) seen = contexts(i, q) == token;
      if (seen) continue;
      column = bwd.input_grad.col(i).segment(p * d, d);
      for (Eigen::Index q = p + 1; q < arch.context; ++q) {
        if (contexts(i, q) == token) column += bwd.input_grad.col(i).segment(q * d, d);
      }
      sq(i) += column.squaredNorm();
    }
  }
  return sq;
}

// out += sum_i weights(i) * grad_i.
template <typename Scalar>
void accumulate_gradient(const Architecture& arch, const ForwardPass<Scalar>& fwd,
                         const BackwardPass<Scalar>& bwd,
                         const Eigen::Ref<const ContextMatrix>& contexts,
                         const Eigen::Ref<const Vector<Scalar>>& weights,
                         BasicGradVector<Scalar>& out) {
  const Eigen::Index d = arch.embedding;
  auto embedding = out.tensor(0);
  for (Eigen::Index i = 0; i < contexts.rows(); ++i) {
    for (Eigen::Index p = 0; p < arch.context; ++p) {
      embedding.col(contexts(i, p)) += weights(i) * bwd.input_grad.col(i).segment(p * d, d);
    }
  }
  for (std::size_t l = 0; l < bwd.deltas.size(); ++l) {
    const Matrix<Scalar> scaled = bwd.deltas[l] * weights.asDiagonal();
    out.tensor(1 + 2 * l).noalias() += scaled * fwd.layer_input(l).transpose();
    out.tensor(2 + 2 * l).col(0) += scaled.rowwise().sum();
  }
}

// p(. | context) over the whole vocabulary.
template <typename Scalar>
Vector<Scalar> forward(const BasicParamVector<Scalar>& params, std::span<const TokenId> context,
                       const Architecture& arch) {
  ContextMatrix row(1, static_cast<Eigen::Index>(context.size()));
  for (std::size_t p = 0; p < context.size(); ++p) row(0, static_cast<Eigen::Index>(p)) = context[p];
  return softmax(forward_pass(params, arch, row).logits).col(0);
}

template <typename Scalar>
Scalar example_loss(const BasicParamVector<Scalar>& params, std::span<const TokenId> context,
                    TokenId target, const Architecture& arch) {
  ContextMatrix row(1, static_cast<Eigen::Index>(context.size()));
  for (std::size_t p = 0; p < context.size(); ++p) row(0, static_cast<Eigen::Index>(p)) = context[p];
  TargetVector t(1);
  t(0) = target;
  detail::check_targets(t, arch);
  return example_nll(forward_pass(params, arch, row), t)(0);
}

// Exact gradient of example_loss by backpropagation.
template <typename Scalar>
BasicGradVector<Scalar> example_grad(const BasicParamVector<Scalar>& params,
                                     std::span<const TokenId> context, TokenId target,
                                     const Architecture& arch) {
  ContextMatrix row(1, static_cast<Eigen::Index>(context.size()));
  for (std::size_t p = 0; p < context.size(); ++p) row(0, static_cast<Eigen::Index>(p)) = context[p];
  TargetVector t(1);
  t(0) = target;
  const auto fwd = forward_pass(params, arch, row);
  const auto bwd = backward_pass(params, arch, fwd, t);
  BasicGradVector<Scalar> grad(params.layout());
  accumulate_gradient<Scalar>(arch, fwd, bwd, row, Vector<Scalar>::Ones(1), grad);
  return grad;
}

// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate i.
template <typename Scalar, typename F>
Vector<Scalar> central_difference(F&& f, Vector<Scalar> x, Scalar h) {
  if (!(h > Scalar(0))) throw InvalidArgument("finite-difference step must be positive");
  Vector<Scalar> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar saved = x(i);
    x(i) = saved + h;
    const Scalar up = f(x);
    x(i) = saved - h;
    const Scalar down = f(x);
    x(i) = saved;
    out(i) = (up - down) / (Scalar(2) * h);
  }
  return out;
}

// Central-difference estimate of example_grad. The loss is evaluated in
// `OracleScalar` (e.g. long double to suppress cancellation error) and the
// result rounded back to double.
template <typename OracleScalar = double>
GradVector finite_diff_grad(const ParamVector& params, std::span<const TokenId> context,
                            TokenId target, const Architecture& arch, double h) {
  check_layout(params.layout(), arch);
  const ParamLayout& layout = params.layout();
  auto loss = [&](const Vector<OracleScalar>& theta) {
    return example_loss(BasicParamVector<OracleScalar>(layout, theta), context, target, arch);
  };
  const Vector<OracleScalar> diff = central_difference<OracleScalar>(
      loss, params.values().template cast<OracleScalar>(), static_cast<OracleScalar>(h));
  return GradVector(layout, diff.template cast<double>());
}

}  // namespace dpft

#endif  // DPFT_NETWORK_HPP_
