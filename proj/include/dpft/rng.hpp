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

#ifndef DPFT_RNG_HPP_
#define DPFT_RNG_HPP_

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace dpft {

// Seedable generator shared by shuffling, initialization, noise and sampling.
// Streams are reproducible for a given standard library build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent stream from a base seed and a list of salts
  // (e.g. run seed + stage index).
  Rng(std::uint64_t seed, std::initializer_list<std::uint32_t> salts) {
    std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    material.insert(material.end(), salts.begin(), salts.end());
    std::seed_seq seq(material.begin(), material.end());
    engine_.seed(seq);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double stddev = 1.0) {
    return std::normal_distribution<double>(0.0, stddev)(engine_);
  }

  // Fills `out` with i.i.d. N(0, stddev^2) draws in index order.
  template <typename Derived>
  void fill_normal(Eigen::DenseBase<Derived>& out, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.coeffRef(i) = dist(engine_);
  }

  template <typename It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpft

#endif  // DPFT_RNG_HPP_
