/*
 * Copyright 2026 The FedSGT Simulator Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSGT_MODEL_HPP
#define FEDSGT_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fedsgt/dataset.hpp"

namespace fedsgt {

// Linear softmax classifier kernels. A weight matrix is label_count x
// feature_dim; logits for a row batch X are X * W^T.

template <typename Derived>
void softmax_rows_inplace(Eigen::MatrixBase<Derived>& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto top = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - top).exp().matrix();
    z.row(i) /= z.row(i).sum();
  }
}

template <typename Scalar>
RowMatrix<Scalar> probabilities(const RowMatrix<Scalar>& weights, const RowMatrix<Scalar>& x) {
  RowMatrix<Scalar> z = x * weights.transpose();
  softmax_rows_inplace(z);
  return z;
}

/// Mean cross-entropy of the samples under `weights`.
template <typename Scalar>
Scalar cross_entropy(const RowMatrix<Scalar>& weights, const Samples<Scalar>& data) {
  if (data.empty()) return Scalar(0);
  const RowMatrix<Scalar> p = probabilities(weights, data.features);
  Scalar loss(0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss -= std::log(p(static_cast<Eigen::Index>(i), data.labels[i]));
  }
  return loss / static_cast<Scalar>(data.size());
}

/// Gradient of the mean cross-entropy over the given rows w.r.t. the weights.
template <typename Scalar>
RowMatrix<Scalar> cross_entropy_gradient(const RowMatrix<Scalar>& weights,
                                         const RowMatrix<Scalar>& x, std::span<const int> labels) {
  RowMatrix<Scalar> residual = probabilities(weights, x);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    residual(static_cast<Eigen::Index>(i), labels[i]) -= Scalar(1);
  }
  RowMatrix<Scalar> grad = residual.transpose() * x;
  grad /= static_cast<Scalar>(labels.size());
  return grad;
}

/// First index of the maximum entry.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

template <typename Scalar>
bool all_finite(const RowMatrix<Scalar>& m) {
  return m.allFinite();
}

}  // namespace fedsgt

#endif  // FEDSGT_MODEL_HPP
