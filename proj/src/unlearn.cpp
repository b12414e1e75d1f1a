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

#include "fedsgt/unlearn.hpp"

#include <algorithm>
#include <sstream>

#include "fedsgt/bank_io.hpp"
#include "fedsgt/parallel.hpp"
#include "fedsgt/rng.hpp"

namespace fedsgt {

namespace {

constexpr std::uint64_t kRequestDomain = 0x2E9;
constexpr std::uint64_t kClusterDomain = 0xC10;
constexpr std::uint64_t kRetrainDomain = 0xFE7;

std::string slice_label(const SliceRef& s) {
  return "slice(" + std::to_string(s.client.value) + "," + std::to_string(s.slice.value) + ")";
}

std::string join_ids(const std::vector<SequenceId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(ids[i].value);
  }
  return out;
}

}  // namespace

std::vector<UnlearnRequest> uniform_requests(const GroupingPlan& plan, std::size_t count,
                                             std::uint64_t seed, std::size_t record_count) {
  std::vector<SliceRef> slices;
  for (const auto& g : plan.groups()) slices.insert(slices.end(), g.begin(), g.end());
  std::sort(slices.begin(), slices.end());
  if (slices.empty()) return {};
  SplitMix64 rng = derive_stream(seed, {kRequestDomain});
  std::vector<UnlearnRequest> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const SliceRef target = slices[rng.bounded(slices.size())];
    const auto size = static_cast<std::size_t>(plan.samples_of(target));
    out.push_back({target, std::max<std::size_t>(1, std::min(record_count, size))});
  }
  return out;
}

std::vector<UnlearnRequest> group_requests(const GroupingPlan& plan,
                                           const std::vector<GroupId>& groups,
                                           std::size_t record_count) {
  std::vector<UnlearnRequest> out;
  for (GroupId g : groups) {
    if (g.get() >= plan.group_count()) {
      throw domain_error("group " + std::to_string(g.value) + " outside the plan");
    }
    std::vector<SliceRef> members = plan.group(g);
    std::sort(members.begin(), members.end());
    const SliceRef target = members.front();
    const auto size = static_cast<std::size_t>(plan.samples_of(target));
    out.push_back({target, std::max<std::size_t>(1, std::min(record_count, size))});
  }
  return out;
}

AuditReport exactness_audit(const ModuleBank& bank, const GroupingPlan& plan,
                            const SequenceSet& seqs, const TrainConfig& cfg, const Dataset& data,
                            const SequenceState& state) {
  AuditReport report;
  std::vector<SequenceTraining> runs(seqs.size());
  parallel_for(seqs.size(), cfg.workers, [&](std::size_t s) {
    const std::size_t p = state.active_len[s];
    if (p == 0) return;
    runs[s] = train_sequence(data, plan, seqs.perms()[s], SequenceId(s), bank.backbone, cfg, p);
  });
  for (std::size_t s = 0; s < seqs.size() && report.pass; ++s) {
    const std::size_t p = state.active_len[s];
    for (std::size_t phase = 0; phase < p; ++phase) {
      ++report.modules_checked;
      if (serialize_module(runs[s].modules[phase]) != serialize_module(bank.modules[s][phase])) {
        report.pass = false;
        report.first_mismatch = {SequenceId(s), PhaseIdx(phase)};
        report.message = "sequence " + std::to_string(s) + " phase " + std::to_string(phase) +
                         " differs from its prefix retrain";
        break;
      }
    }
  }
  if (report.pass) {
    report.message = std::to_string(report.modules_checked) + " modules match prefix retraining";
  }
  return report;
}

FedSgtSystem::FedSgtSystem(Dataset data, GroupingPlan plan, SequenceSet seqs, ModuleBank bank,
                           Strategy strategy, TrainConfig cfg, bool evaluate_utility)
    : data_(std::move(data)),
      plan_(std::move(plan)),
      seqs_(std::move(seqs)),
      bank_(std::move(bank)),
      strategy_(strategy),
      cfg_(cfg),
      evaluate_utility_(evaluate_utility),
      state_(initial_state(seqs_)) {
  if (bank_.sequence_count() != seqs_.size() || bank_.group_count() != seqs_.group_count()) {
    throw config_error("module bank does not match the sequence set");
  }
}

void FedSgtSystem::restore_state(SequenceState state, const std::map<SliceRef, std::size_t>& removed) {
  if (state.active_len.size() != seqs_.size() || state.deleted.size() != seqs_.group_count()) {
    throw corrupt_error("saved state does not match the module bank");
  }
  for (const auto& [slice, count] : removed) {
    if (!plan_.contains(slice)) throw corrupt_error("saved state names an unknown slice");
    data_.slice(slice).erase_front(count);
    removed_[slice] += count;
  }
  SequenceState recomputed = initial_state(seqs_);
  for (GroupId g : state.deleted_groups()) recomputed = apply_deletion(recomputed, seqs_, g);
  if (recomputed.active_len != state.active_len) {
    throw corrupt_error("saved state is inconsistent with its deleted groups");
  }
  state_ = std::move(state);
}

TimelineRecord FedSgtSystem::snapshot(std::size_t step, std::string unit) const {
  TimelineRecord rec;
  rec.step = step;
  rec.method = "FedSGT";
  rec.affected_unit = std::move(unit);
  rec.status = ServiceStatus::from_survivors(state_.surviving());

  std::ostringstream surviving;
  bool first = true;
  for (std::size_t s = 0; s < seqs_.size(); ++s) {
    if (state_.active_len[s] == 0) continue;
    surviving << (first ? "" : " ") << s << ":" << state_.active_len[s];
    first = false;
  }
  rec.surviving = surviving.str();

  if (auto best = select_longseq(state_, seqs_)) {
    std::uint64_t mass = 0;
    for (std::size_t p = 0; p < state_.active_len[best->get()]; ++p) {
      for (const auto& slice : plan_.group(seqs_[*best][p])) mass += data_.slice(slice).size();
    }
    rec.remaining_samples = mass;
    switch (strategy_) {
      case Strategy::LongSeq: rec.notes = "LongSeq selected=" + std::to_string(best->value); break;
      case Strategy::MinSeq:
        rec.notes = "MinSeq selected=" + join_ids(select_minseq(state_, seqs_));
        break;
      case Strategy::AllSeq: {
        std::vector<SequenceId> ids;
        for (const auto& [s, w] : select_allseq(state_, seqs_)) ids.push_back(s);
        rec.notes = "AllSeq selected=" + join_ids(ids);
        break;
      }
    }
    if (evaluate_utility_) rec.utility = evaluate(bank_, seqs_, state_, strategy_, data_.test);
  } else {
    rec.notes = "service failed: every sequence lost its first module";
  }
  return rec;
}

TimelineRecord FedSgtSystem::baseline_record() const { return snapshot(0, ""); }

TimelineRecord FedSgtSystem::process_request(const UnlearnRequest& req) {
  const GroupId group = plan_.group_of(req.target);
  const std::uint64_t size = plan_.samples_of(req.target);
  if (req.record_count == 0 || req.record_count > size) {
    throw config_error("request removes " + std::to_string(req.record_count) + " records from " +
                       slice_label(req.target) + " of size " + std::to_string(size));
  }
  state_ = apply_deletion(std::move(state_), seqs_, group);
  auto& slice = data_.slice(req.target);
  const std::size_t removed = std::min(req.record_count, slice.size());
  slice.erase_front(removed);
  if (removed) removed_[req.target] += removed;
  ++steps_;
  return snapshot(steps_, "group " + std::to_string(group.value) + " " + slice_label(req.target));
}

AuditReport FedSgtSystem::audit() const {
  return exactness_audit(bank_, plan_, seqs_, cfg_, data_, state_);
}

Timeline run_stream(FedSgtSystem& system, const std::vector<UnlearnRequest>& requests) {
  Timeline out;
  out.push_back(system.baseline_record());
  for (const auto& req : requests) out.push_back(system.process_request(req));
  return out;
}

FedCioSystem::FedCioSystem(Dataset data, const TrainConfig& cfg, const FedCioOptions& opts,
                           std::size_t stack_size)
    : data_(std::move(data)), cfg_(cfg), opts_(opts), stack_size_(stack_size) {
  if (opts_.clusters == 0 || opts_.clusters > data_.client_count()) {
    throw config_error("FedCIO: need 1 <= c <= N clusters (c=" + std::to_string(opts_.clusters) +
                       ", N=" + std::to_string(data_.client_count()) + ")");
  }
  backbone_ = make_backbone(data_.label_count, data_.feature_dim, cfg_);
  models_.resize(opts_.clusters);
  alive_.assign(opts_.clusters, true);
  retrain_count_.assign(opts_.clusters, 0);
  for (const auto& c : data_.clients) {
    std::vector<std::size_t> sizes;
    for (const auto& s : c.slices) sizes.push_back(s.size());
    original_sizes_.push_back(std::move(sizes));
  }
  for (std::size_t k = 0; k < opts_.clusters; ++k) train_cluster(k);
}

void FedCioSystem::train_cluster(std::size_t k) {
  std::vector<ClientId> members;
  for (std::size_t c = k; c < data_.client_count(); c += opts_.clusters) members.emplace_back(c);
  const std::uint64_t domain = derive_seed(kClusterDomain, {k, retrain_count_[k]});
  models_[k] = train_fedavg(data_, members, backbone_, stack_size_, cfg_, domain, &stats_);
}

std::size_t FedCioSystem::live_clusters() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true));
}

std::uint64_t FedCioSystem::live_samples() const {
  std::uint64_t mass = 0;
  for (std::size_t c = 0; c < data_.client_count(); ++c) {
    if (alive_[cluster_of(ClientId(c))]) mass += data_.clients[c].size();
  }
  return mass;
}

TimelineRecord FedCioSystem::snapshot(std::size_t step, std::string unit, std::string notes) const {
  TimelineRecord rec;
  rec.step = step;
  rec.method = "FedCIO";
  rec.affected_unit = std::move(unit);
  rec.status = ServiceStatus::from_survivors(live_clusters());
  rec.remaining_samples = live_samples();
  rec.notes = std::move(notes);
  Ensemble e;
  std::ostringstream surviving;
  for (std::size_t k = 0; k < opts_.clusters; ++k) {
    if (!alive_[k]) continue;
    surviving << (e.weights.empty() ? "" : " ") << "c" << k;
    e.weights.push_back(models_[k].composite());
  }
  for (std::size_t i = 0; i < e.weights.size(); ++i) {
    e.mix.push_back(1.0 / static_cast<double>(e.weights.size()));
  }
  rec.surviving = surviving.str();
  if (opts_.evaluate_utility) rec.utility = evaluate(e, data_.test);
  return rec;
}

TimelineRecord FedCioSystem::baseline_record() const {
  return snapshot(0, "", opts_.retrain ? "retrain mode" : "no-retrain mode");
}

TimelineRecord FedCioSystem::process_request(const UnlearnRequest& req) {
  const auto& target = req.target;
  if (target.client.get() >= original_sizes_.size() ||
      target.slice.get() >= original_sizes_[target.client.get()].size()) {
    throw lookup_error("FedCIO: unknown " + slice_label(target));
  }
  const std::size_t size = original_sizes_[target.client.get()][target.slice.get()];
  if (req.record_count == 0 || req.record_count > size) {
    throw config_error("FedCIO: request larger than " + slice_label(target));
  }
  auto& slice = data_.slice(target);
  slice.erase_front(std::min(req.record_count, slice.size()));
  const std::size_t k = cluster_of(target.client);
  std::string notes;
  if (opts_.retrain) {
    ++retrain_count_[k];
    train_cluster(k);
    notes = "retrained cluster " + std::to_string(k) + ", downtime " +
            std::to_string(cfg_.baseline_rounds) + " rounds";
  } else if (alive_[k]) {
    alive_[k] = false;
    notes = "cluster " + std::to_string(k) + " retired";
  }
  ++steps_;
  return snapshot(steps_, "cluster " + std::to_string(k) + " " + slice_label(target),
                  std::move(notes));
}

Timeline fedcio_simulate(const Dataset& data, const TrainConfig& cfg, const FedCioOptions& opts,
                         std::size_t stack_size, const std::vector<UnlearnRequest>& requests) {
  FedCioSystem system(data, cfg, opts, stack_size);
  Timeline out;
  out.push_back(system.baseline_record());
  for (const auto& req : requests) out.push_back(system.process_request(req));
  return out;
}

Timeline fedretrain_simulate(const Dataset& data, const TrainConfig& cfg, std::size_t stack_size,
                             const std::vector<UnlearnRequest>& requests, std::size_t stride,
                             TrainStats* stats) {
  if (stride == 0) throw config_error("FedRetrain: stride must be >= 1");
  Dataset current = data;
  std::vector<std::vector<std::size_t>> original;
  for (const auto& c : data.clients) {
    std::vector<std::size_t> sizes;
    for (const auto& s : c.slices) sizes.push_back(s.size());
    original.push_back(std::move(sizes));
  }
  std::vector<ClientId> everyone;
  for (std::size_t c = 0; c < data.client_count(); ++c) everyone.emplace_back(c);
  const RowMatrix<double> backbone = make_backbone(data.label_count, data.feature_dim, cfg);

  auto retrain = [&](std::size_t event) {
    const std::uint64_t domain = derive_seed(kRetrainDomain, {event});
    const StackModel model = train_fedavg(current, everyone, backbone, stack_size, cfg, domain, stats);
    Ensemble e;
    e.weights.push_back(model.composite());
    e.mix.push_back(1.0);
    return evaluate(e, current.test);
  };

  Timeline out;
  TimelineRecord base;
  base.method = "FedRetrain";
  base.remaining_samples = current.train_size();
  base.status = ServiceStatus::from_survivors(1);
  base.surviving = "retrained";
  base.utility = retrain(0);
  out.push_back(base);

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    const auto& t = req.target;
    if (t.client.get() >= original.size() || t.slice.get() >= original[t.client.get()].size()) {
      throw lookup_error("FedRetrain: unknown " + slice_label(t));
    }
    if (req.record_count == 0 || req.record_count > original[t.client.get()][t.slice.get()]) {
      throw config_error("FedRetrain: request larger than " + slice_label(t));
    }
    auto& slice = current.slice(t);
    slice.erase_front(std::min(req.record_count, slice.size()));

    TimelineRecord rec;
    rec.step = i + 1;
    rec.method = "FedRetrain";
    rec.affected_unit = slice_label(t);
    rec.status = ServiceStatus::from_survivors(1);
    rec.remaining_samples = current.train_size();
    rec.surviving = "retrained";
    rec.notes = "downtime " + std::to_string(cfg.baseline_rounds) + " rounds";
    if (rec.step % stride == 0) {
      rec.utility = retrain(rec.step);
      rec.notes += ", evaluated";
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<std::size_t> failure_step(const Timeline& timeline) {
  for (const auto& rec : timeline) {
    if (!rec.status.available()) return rec.step;
  }
  return std::nullopt;
}

std::optional<double> mean_utility(const Timeline& timeline) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& rec : timeline) {
    if (rec.utility) {
      sum += *rec.utility;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace fedsgt
