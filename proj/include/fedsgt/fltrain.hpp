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

#ifndef FEDSGT_FLTRAIN_HPP
#define FEDSGT_FLTRAIN_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fedsgt/core_types.hpp"
#include "fedsgt/dataset.hpp"
#include "fedsgt/grouping.hpp"
#include "fedsgt/rng.hpp"
#include "fedsgt/sequencing.hpp"

namespace fedsgt {

struct TrainConfig {
  std::size_t epochs = 3;            // local epochs E
  std::size_t rounds_per_phase = 1;  // FedSGT rounds per phase
  std::size_t baseline_rounds = 10;  // T for the FedAvg-style baselines
  double learning_rate = 1.0;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double backbone_scale = 0.1;
  std::size_t workers = 1;
};

/// A frozen k x d additive adapter and the training context it came from.
struct AdapterModule {
  GroupId group;              // group added in this module's phase
  std::uint64_t samples = 0;  // cumulative samples the phase trained on
  RowMatrix<double> weights;
};

/// Frozen backbone plus, per sequence, its L phase modules in training order.
/// Serving with an active prefix of length p uses backbone + sum of the first
/// p modules.
struct ModuleBank {
  std::size_t feature_dim = 0;
  std::size_t label_count = 0;
  RowMatrix<double> backbone;
  std::vector<std::vector<AdapterModule>> modules;

  std::size_t sequence_count() const { return modules.size(); }
  std::size_t group_count() const { return modules.empty() ? 0 : modules.front().size(); }
  /// Group orders recorded in the bank.
  SequenceSet sequences() const;
  RowMatrix<double> composite(SequenceId s, std::size_t active_len) const;
};

using ToyModel = ModuleBank;

/// Bookkeeping in parameter-update units: one unit is one scalar parameter
/// updated for one sample in one local epoch.
struct TrainStats {
  std::uint64_t parameter_updates = 0;
  std::uint64_t rounds = 0;
  std::vector<std::uint64_t> client_rounds;  // rounds joined, per client

  void merge(const TrainStats& other);
  void note_participant(ClientId c);
};

struct Participant {
  ClientId client;
  Samples<double> data;
};

/// Coordinates that name one federated round; together with the config
/// seed and client id they select each client's PRNG stream.
struct RoundKey {
  std::uint64_t domain = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t round = 0;
};

RowMatrix<double> make_backbone(std::size_t label_count, std::size_t feature_dim,
                                const TrainConfig& cfg);

/// E epochs of mini-batch gradient descent on the client's data. Every
/// matrix in `trainable` receives the gradient of the composite
/// frozen + sum(trainable); `frozen` is never modified.
std::vector<RowMatrix<double>> local_update(const RowMatrix<double>& frozen,
                                            std::vector<RowMatrix<double>> trainable,
                                            const Samples<double>& data, const TrainConfig& cfg,
                                            SplitMix64& rng, TrainStats* stats = nullptr);

/// One FedAvg round: local updates from the current trainable block, then a
/// sample-weighted average accumulated pairwise in ascending client order.
std::vector<RowMatrix<double>> federated_round(const RowMatrix<double>& frozen,
                                               const std::vector<RowMatrix<double>>& trainable,
                                               const std::vector<Participant>& participants,
                                               const TrainConfig& cfg, const RoundKey& key,
                                               TrainStats* stats = nullptr);

struct SequenceTraining {
  std::vector<AdapterModule> modules;
  TrainStats stats;
};

/// Trains the first `phases` modules of one sequence (all L by default).
/// Module p sees only the groups at positions 0..p and is frozen before
/// phase p + 1 starts.
SequenceTraining train_sequence(const Dataset& data, const GroupingPlan& plan,
                                const Permutation& order, SequenceId id,
                                const RowMatrix<double>& backbone, const TrainConfig& cfg,
                                std::optional<std::size_t> phases = std::nullopt);

struct BankTraining {
  ModuleBank bank;
  TrainStats stats;
};

/// All sequences; runs them on up to cfg.workers threads with identical output.
BankTraining train_bank(const Dataset& data, const GroupingPlan& plan, const SequenceSet& seqs,
                        const TrainConfig& cfg);

struct Prediction {
  int label = 0;
  Vector<double> scores;
};

/// A served model: weighted members whose probability outputs are averaged.
struct Ensemble {
  std::vector<RowMatrix<double>> weights;
  std::vector<double> mix;

  bool empty() const { return weights.empty(); }
};

Ensemble serving_ensemble(const ModuleBank& bank, const SequenceSet& seqs,
                          const SequenceState& state, Strategy strategy);

std::optional<Prediction> predict(const Ensemble& model, const Vector<double>& x);
std::optional<Prediction> predict(const ModuleBank& bank, const SequenceSet& seqs,
                                  const SequenceState& state, Strategy strategy,
                                  const Vector<double>& x);

/// Accuracy on `test`; empty when no model is available to serve.
std::optional<double> evaluate(const Ensemble& model, const Samples<double>& test);
std::optional<double> evaluate(const ModuleBank& bank, const SequenceSet& seqs,
                               const SequenceState& state, Strategy strategy,
                               const Samples<double>& test);

/// Baseline model: the backbone plus a stack of adapters trained jointly.
struct StackModel {
  RowMatrix<double> backbone;
  std::vector<RowMatrix<double>> adapters;

  RowMatrix<double> composite() const;
};

/// Standard FedAvg over `clients` for cfg.baseline_rounds rounds, training a
/// stack of `stack_size` adapters. `domain` separates PRNG streams of
/// different baseline runs (clusters, retrain events).
StackModel train_fedavg(const Dataset& data, const std::vector<ClientId>& clients,
                        const RowMatrix<double>& backbone, std::size_t stack_size,
                        const TrainConfig& cfg, std::uint64_t domain, TrainStats* stats = nullptr);

}  // namespace fedsgt

#endif  // FEDSGT_FLTRAIN_HPP
