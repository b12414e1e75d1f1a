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

#ifndef FEDSGT_DATASET_HPP
#define FEDSGT_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedsgt/core_types.hpp"
#include "fedsgt/grouping.hpp"

namespace fedsgt {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Labelled samples, one feature vector per row.
template <typename Scalar>
struct Samples {
  RowMatrix<Scalar> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  /// Drops the first `count` rows (deletions always consume a slice from the front).
  void erase_front(std::size_t count);
  void append(const Samples& other);
};

template <typename Scalar>
struct ClientData {
  std::vector<Samples<Scalar>> slices;
  std::size_t size() const;
};

/// Per-client sliced training data plus a shared test split.
template <typename Scalar>
struct BasicDataset {
  std::size_t feature_dim = 0;
  std::size_t label_count = 0;
  std::vector<ClientData<Scalar>> clients;
  Samples<Scalar> test;

  std::size_t client_count() const { return clients.size(); }
  const Samples<Scalar>& slice(const SliceRef& ref) const;
  Samples<Scalar>& slice(const SliceRef& ref);
  std::size_t train_size() const;
  std::vector<SliceInfo> catalog() const;

  /// Rows of `client` that fall in the given groups, in slice order.
  Samples<Scalar> local_data(ClientId client, const GroupingPlan& plan,
                             const std::vector<bool>& groups) const;
  Samples<Scalar> client_data(ClientId client) const;
};

using Dataset = BasicDataset<double>;

struct SynthSpec {
  std::size_t clients = 10;
  std::size_t samples_per_client = 200;
  std::size_t slices_per_client = 5;
  std::size_t feature_dim = 20;
  std::size_t label_count = 5;
  /// Dirichlet concentration for label skew; empty means IID labels.
  std::optional<double> alpha;
  /// Norm of each class mean before the 1/sqrt(d) feature scaling.
  double separation = 3.0;
  double noise = 1.0;
  std::size_t test_samples = 1000;
  std::uint64_t seed = 0;
};

/// Gaussian class-conditional toy data. Throws a config error when there are
/// fewer training samples than labels or a count is zero.
Dataset synth_dataset(const SynthSpec& spec);

/// Reads `label,f0,f1,...` rows plus a manifest with header
/// `client,slice,split` giving each row's owner and split (train/test).
Dataset load_csv_dataset(const std::string& data_path, const std::string& manifest_path);

}  // namespace fedsgt

#endif  // FEDSGT_DATASET_HPP
