// Copyright 2026 The EIN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace ein {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector3 = Eigen::Vector3d;

/// Numerically stable softmax over a dense vector expression.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> softmax(
    const Eigen::MatrixBase<Derived>& scores) {
  Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> z = scores;
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

/// Pulls a gradient w.r.t. softmax outputs back to the pre-softmax scores.
template <class DerivedP, class DerivedG>
Eigen::Matrix<typename DerivedP::Scalar, DerivedP::RowsAtCompileTime, 1> softmax_backward(
    const Eigen::MatrixBase<DerivedP>& probs, const Eigen::MatrixBase<DerivedG>& grad_probs) {
  const auto dot = probs.dot(grad_probs);
  return probs.array() * (grad_probs.array() - dot);
}

template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const typename Derived::Scalar m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Inverse of logistic; p must lie strictly inside (0, 1).
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr std::uint64_t kFnvOffset64 = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime64 = 1099511628211ull;

/// FNV-1a over raw bytes. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset64) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime64;
  }
  return h;
}

/// 128-bit content key built from two independently seeded FNV-1a streams,
/// rendered as 32 hex digits.
std::string content_key(std::string_view bytes);

/// Splits one master seed into a stream of decorrelated per-item seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace ein
