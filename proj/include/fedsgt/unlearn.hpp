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

#ifndef FEDSGT_UNLEARN_HPP
#define FEDSGT_UNLEARN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsgt/core_types.hpp"
#include "fedsgt/dataset.hpp"
#include "fedsgt/fltrain.hpp"
#include "fedsgt/grouping.hpp"
#include "fedsgt/sequencing.hpp"

namespace fedsgt {

inline constexpr std::size_t kDefaultRequestRecords = 100;

/// Remove `record_count` records from one client slice.
struct UnlearnRequest {
  SliceRef target;
  std::size_t record_count = kDefaultRequestRecords;
};

/// One row per processed request; step 0 is the pre-deletion baseline.
struct TimelineRecord {
  std::size_t step = 0;
  std::string method;
  std::string affected_unit;
  ServiceStatus status;
  std::optional<double> utility;  // test accuracy; empty when not evaluated or failed
  std::uint64_t remaining_samples = 0;
  std::string surviving;
  std::string notes;
};

using Timeline = std::vector<TimelineRecord>;

/// Targets drawn uniformly over the plan's slices; each removes
/// min(record_count, slice size) records.
std::vector<UnlearnRequest> uniform_requests(const GroupingPlan& plan, std::size_t count,
                                             std::uint64_t seed,
                                             std::size_t record_count = kDefaultRequestRecords);

/// One request per listed group, each naming that group's first slice.
std::vector<UnlearnRequest> group_requests(const GroupingPlan& plan,
                                           const std::vector<GroupId>& groups,
                                           std::size_t record_count = kDefaultRequestRecords);

struct AuditReport {
  bool pass = true;
  std::size_t modules_checked = 0;
  std::optional<std::pair<SequenceId, PhaseIdx>> first_mismatch;
  std::string message;
};

/// Retrains every surviving prefix from scratch on `data` (which must
/// already exclude deleted records) and compares the modules byte for byte
/// with the bank.
AuditReport exactness_audit(const ModuleBank& bank, const GroupingPlan& plan,
                            const SequenceSet& seqs, const TrainConfig& cfg, const Dataset& data,
                            const SequenceState& state);

/// A trained FedSGT deployment answering a stream of deletions.
class FedSgtSystem {
 public:
  FedSgtSystem(Dataset data, GroupingPlan plan, SequenceSet seqs, ModuleBank bank,
               Strategy strategy, TrainConfig cfg, bool evaluate_utility = true);

  TimelineRecord baseline_record() const;
  /// Invalid targets are rejected with an exception and leave the system unchanged.
  TimelineRecord process_request(const UnlearnRequest& req);

  const SequenceState& state() const { return state_; }
  void restore_state(SequenceState state, const std::map<SliceRef, std::size_t>& removed);
  const std::map<SliceRef, std::size_t>& removed_records() const { return removed_; }
  const Dataset& data() const { return data_; }
  const GroupingPlan& plan() const { return plan_; }
  const SequenceSet& sequences() const { return seqs_; }
  const ModuleBank& bank() const { return bank_; }
  ModuleBank& mutable_bank() { return bank_; }
  AuditReport audit() const;

 private:
  TimelineRecord snapshot(std::size_t step, std::string unit) const;

  Dataset data_;
  GroupingPlan plan_;
  SequenceSet seqs_;
  ModuleBank bank_;
  Strategy strategy_;
  TrainConfig cfg_;
  bool evaluate_utility_;
  SequenceState state_;
  std::map<SliceRef, std::size_t> removed_;
  std::size_t steps_ = 0;
};

/// Baseline row followed by one row per request.
Timeline run_stream(FedSgtSystem& system, const std::vector<UnlearnRequest>& requests);

struct FedCioOptions {
  std::size_t clusters = 5;
  /// Retrain a hit cluster (charging T rounds of downtime) instead of
  /// retiring it.
  bool retrain = false;
  bool evaluate_utility = true;
};

/// Clients split round-robin into c clusters, each trained by its own
/// FedAvg; serving averages the probability outputs of live clusters.
class FedCioSystem {
 public:
  FedCioSystem(Dataset data, const TrainConfig& cfg, const FedCioOptions& opts,
               std::size_t stack_size);

  TimelineRecord baseline_record() const;
  TimelineRecord process_request(const UnlearnRequest& req);
  const TrainStats& stats() const { return stats_; }
  std::size_t live_clusters() const;
  std::uint64_t live_samples() const;
  std::size_t cluster_of(ClientId c) const { return c.get() % opts_.clusters; }

 private:
  TimelineRecord snapshot(std::size_t step, std::string unit, std::string notes) const;
  void train_cluster(std::size_t k);

  Dataset data_;
  TrainConfig cfg_;
  FedCioOptions opts_;
  std::size_t stack_size_;
  RowMatrix<double> backbone_;
  std::vector<StackModel> models_;
  std::vector<bool> alive_;
  std::vector<std::size_t> retrain_count_;
  std::vector<std::vector<std::size_t>> original_sizes_;
  TrainStats stats_;
  std::size_t steps_ = 0;
};

Timeline fedcio_simulate(const Dataset& data, const TrainConfig& cfg, const FedCioOptions& opts,
                         std::size_t stack_size, const std::vector<UnlearnRequest>& requests);

/// Retrains one FedAvg model on all remaining data at every stride-th request.
Timeline fedretrain_simulate(const Dataset& data, const TrainConfig& cfg, std::size_t stack_size,
                             const std::vector<UnlearnRequest>& requests, std::size_t stride,
                             TrainStats* stats = nullptr);

/// First step whose status is Failed.
std::optional<std::size_t> failure_step(const Timeline& timeline);
/// Mean of the evaluated utilities, empty if none were evaluated.
std::optional<double> mean_utility(const Timeline& timeline);

}  // namespace fedsgt

#endif  // FEDSGT_UNLEARN_HPP
