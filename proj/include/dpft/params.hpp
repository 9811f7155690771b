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

#ifndef DPFT_PARAMS_HPP_
#define DPFT_PARAMS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dpft/error.hpp"

namespace dpft {

inline constexpr int kDefaultEmbedding = 64;

// Feedforward LM shape: k context embeddings of width `embedding` are
// concatenated and fed through ReLU layers of `hidden` widths, then a
// softmax over `vocab` outputs.
struct Architecture {
  int context = 20;
  int embedding = kDefaultEmbedding;
  std::vector<int> hidden;
  int vocab = 0;

  // "small" = [500, 250, 50], "large" = [10000, 5000, 1000]; both k = 20.
  static Architecture preset(std::string_view name, int vocab);

  int input_width() const { return context * embedding; }
  // Throws InvalidArgument when any extent is non-positive or hidden is empty.
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

std::string to_string(const Architecture& arch);

// One named tensor inside a flat parameter array, stored column-major.
struct TensorSlot {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const TensorSlot&) const = default;
};

// Ordered, non-overlapping slots covering [0, total()).
//
// Order: "embedding" (embedding x vocab, one column per token), then
// "dense<i>.weight" (out x in) and "dense<i>.bias" (out x 1) for every hidden
// layer, then "output.weight" and "output.bias".
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const Architecture& arch);

  const std::vector<TensorSlot>& slots() const { return slots_; }
  const TensorSlot& slot(std::size_t i) const { return slots_.at(i); }
  const TensorSlot& find(std::string_view name) const;
  Eigen::Index total() const { return total_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<TensorSlot> slots_;
  Eigen::Index total_ = 0;
};

struct ParamTag {};
struct GradTag {};

// Flat vector of reals with its tensor layout. The tag keeps parameters and
// gradients from being mixed up at compile time.
template <typename Scalar, typename Tag>
class LayoutVector {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;
  using ConstMatrixMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

  LayoutVector() = default;
  explicit LayoutVector(ParamLayout layout)
      : layout_(std::move(layout)), values_(VectorType::Zero(layout_.total())) {}
  LayoutVector(ParamLayout layout, VectorType values)
      : layout_(std::move(layout)), values_(std::move(values)) {
    if (values_.size() != layout_.total()) {
      throw ShapeError("value count " + std::to_string(values_.size()) +
                       " does not match layout extent " + std::to_string(layout_.total()));
    }
  }

  const ParamLayout& layout() const { return layout_; }
  VectorType& values() { return values_; }
  const VectorType& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

  MatrixMap tensor(std::size_t i) {
    const auto& s = layout_.slot(i);
    return MatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }
  ConstMatrixMap tensor(std::size_t i) const {
    const auto& s = layout_.slot(i);
    return ConstMatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }

  template <typename NewScalar>
  LayoutVector<NewScalar, Tag> cast() const {
    return LayoutVector<NewScalar, Tag>(layout_, values_.template cast<NewScalar>());
  }

  bool operator==(const LayoutVector& other) const {
    return layout_ == other.layout_ && values_.size() == other.values_.size() &&
           values_ == other.values_;
  }

 private:
  ParamLayout layout_;
  VectorType values_;
};

template <typename Scalar>
using BasicParamVector = LayoutVector<Scalar, ParamTag>;
template <typename Scalar>
using BasicGradVector = LayoutVector<Scalar, GradTag>;

using ParamVector = BasicParamVector<double>;
using GradVector = BasicGradVector<double>;

// Throws ShapeError listing expected vs actual extents.
void check_layout(const ParamLayout& actual, const Architecture& arch);

}  // namespace dpft

#endif  // DPFT_PARAMS_HPP_
