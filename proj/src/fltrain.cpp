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

#include "fedsgt/fltrain.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fedsgt/model.hpp"
#include "fedsgt/parallel.hpp"

namespace fedsgt {

namespace {

constexpr std::uint64_t kSequenceDomain = 0x5EC;
constexpr std::uint64_t kBackboneDomain = 0xBB;

RowMatrix<double> pairwise_sum(const std::vector<RowMatrix<double>>& terms, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo == 1) return terms[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  RowMatrix<double> left = pairwise_sum(terms, lo, mid);
  left += pairwise_sum(terms, mid, hi);
  return left;
}

}  // namespace

void TrainStats::merge(const TrainStats& other) {
  parameter_updates += other.parameter_updates;
  rounds += other.rounds;
  if (client_rounds.size() < other.client_rounds.size()) {
    client_rounds.resize(other.client_rounds.size(), 0);
  }
  for (std::size_t i = 0; i < other.client_rounds.size(); ++i) {
    client_rounds[i] += other.client_rounds[i];
  }
}

void TrainStats::note_participant(ClientId c) {
  if (client_rounds.size() <= c.get()) client_rounds.resize(c.get() + 1, 0);
  ++client_rounds[c.get()];
}

SequenceSet ModuleBank::sequences() const {
  std::vector<Permutation> perms;
  for (const auto& seq : modules) {
    Permutation p;
    for (const auto& m : seq) p.push_back(m.group);
    perms.push_back(std::move(p));
  }
  return SequenceSet(group_count(), std::move(perms), 0);
}

RowMatrix<double> ModuleBank::composite(SequenceId s, std::size_t active_len) const {
  RowMatrix<double> w = backbone;
  const auto& seq = modules.at(s.get());
  for (std::size_t p = 0; p < active_len && p < seq.size(); ++p) w += seq[p].weights;
  return w;
}

RowMatrix<double> StackModel::composite() const {
  RowMatrix<double> w = backbone;
  for (const auto& a : adapters) w += a;
  return w;
}

RowMatrix<double> make_backbone(std::size_t label_count, std::size_t feature_dim,
                                const TrainConfig& cfg) {
  RowMatrix<double> w(static_cast<Eigen::Index>(label_count),
                      static_cast<Eigen::Index>(feature_dim));
  SplitMix64 rng = derive_stream(cfg.seed, {kBackboneDomain});
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = cfg.backbone_scale * rng.normal();
  }
  return w;
}

std::vector<RowMatrix<double>> local_update(const RowMatrix<double>& frozen,
                                            std::vector<RowMatrix<double>> trainable,
                                            const Samples<double>& data, const TrainConfig& cfg,
                                            SplitMix64& rng, TrainStats* stats) {
  const std::size_t n = data.size();
  if (n == 0 || trainable.empty()) return trainable;
  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, n));
  const auto d = data.features.cols();
  const auto params = static_cast<std::uint64_t>(frozen.size());

  std::vector<std::size_t> order(n);
  RowMatrix<double> xb(static_cast<Eigen::Index>(batch), d);
  std::vector<int> yb(batch);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t b = std::min(batch, n - start);
      if (static_cast<std::size_t>(xb.rows()) != b) xb.resize(static_cast<Eigen::Index>(b), d);
      yb.resize(b);
      for (std::size_t i = 0; i < b; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) =
            data.features.row(static_cast<Eigen::Index>(order[start + i]));
        yb[i] = data.labels[order[start + i]];
      }
      RowMatrix<double> w = frozen;
      for (const auto& a : trainable) w += a;
      const RowMatrix<double> grad = cross_entropy_gradient<double>(w, xb, yb);
      for (auto& a : trainable) a.noalias() -= cfg.learning_rate * grad;
      if (stats) stats->parameter_updates += b * params * trainable.size();
    }
    for (const auto& a : trainable) {
      if (!a.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite parameters after local epoch " << epoch << " (" << n
            << " samples, learning rate " << cfg.learning_rate << ")";
        throw training_error(msg.str());
      }
    }
  }
  return trainable;
}

std::vector<RowMatrix<double>> federated_round(const RowMatrix<double>& frozen,
                                               const std::vector<RowMatrix<double>>& trainable,
                                               const std::vector<Participant>& participants,
                                               const TrainConfig& cfg, const RoundKey& key,
                                               TrainStats* stats) {
  if (participants.empty()) throw training_error("federated round without participants");

  std::vector<const Participant*> ordered;
  for (const auto& p : participants) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Participant* a, const Participant* b) { return a->client < b->client; });

  std::vector<std::vector<RowMatrix<double>>> results(ordered.size());
  std::vector<TrainStats> local_stats(ordered.size());
  double total = 0.0;
  for (const auto* p : ordered) total += static_cast<double>(p->data.size());
  if (total == 0.0) throw training_error("federated round over empty data");

  for (std::size_t i = 0; i < ordered.size(); ++i) {
    SplitMix64 rng =
        derive_stream(cfg.seed, {key.domain, key.a, key.b, key.round, ordered[i]->client.value});
    try {
      results[i] = local_update(frozen, trainable, ordered[i]->data, cfg, rng, &local_stats[i]);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [client " << ordered[i]->client << ", round key " << key.domain << "/"
          << key.a << "/" << key.b << "/" << key.round << "]";
      throw training_error(msg.str());
    }
  }

  std::vector<RowMatrix<double>> averaged;
  for (std::size_t m = 0; m < trainable.size(); ++m) {
    std::vector<RowMatrix<double>> terms;
    terms.reserve(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      terms.push_back(results[i][m] * (static_cast<double>(ordered[i]->data.size()) / total));
    }
    averaged.push_back(pairwise_sum(terms, 0, terms.size()));
  }

  if (stats) {
    ++stats->rounds;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      stats->parameter_updates += local_stats[i].parameter_updates;
      stats->note_participant(ordered[i]->client);
    }
  }
  return averaged;
}

SequenceTraining train_sequence(const Dataset& data, const GroupingPlan& plan,
                                const Permutation& order, SequenceId id,
                                const RowMatrix<double>& backbone, const TrainConfig& cfg,
                                std::optional<std::size_t> phases) {
  const std::size_t L = plan.group_count();
  if (order.size() != L) throw config_error("train_sequence: order length differs from L");
  const std::size_t count = std::min(phases.value_or(L), L);

  SequenceTraining out;
  std::vector<bool> included(L, false);
  RowMatrix<double> frozen = backbone;
  for (std::size_t phase = 0; phase < count; ++phase) {
    included[order[phase].get()] = true;
    std::vector<Participant> participants;
    std::uint64_t samples = 0;
    for (std::size_t c = 0; c < data.client_count(); ++c) {
      Samples<double> local = data.local_data(ClientId(c), plan, included);
      if (local.empty()) continue;
      samples += local.size();
      participants.push_back({ClientId(c), std::move(local)});
    }
    if (participants.empty()) {
      throw training_error("sequence " + std::to_string(id.value) + " phase " +
                           std::to_string(phase) + ": no cumulative data");
    }

    std::vector<RowMatrix<double>> active{
        RowMatrix<double>::Zero(backbone.rows(), backbone.cols())};
    for (std::size_t round = 0; round < cfg.rounds_per_phase; ++round) {
      active = federated_round(frozen, active, participants, cfg,
                               RoundKey{kSequenceDomain, id.value, phase, round}, &out.stats);
    }
    frozen += active.front();
    out.modules.push_back({order[phase], samples, std::move(active.front())});
  }
  return out;
}

BankTraining train_bank(const Dataset& data, const GroupingPlan& plan, const SequenceSet& seqs,
                        const TrainConfig& cfg) {
  if (seqs.group_count() != plan.group_count()) {
    throw config_error("train_bank: sequences and grouping disagree on L");
  }
  BankTraining out;
  out.bank.feature_dim = data.feature_dim;
  out.bank.label_count = data.label_count;
  out.bank.backbone = make_backbone(data.label_count, data.feature_dim, cfg);

  std::vector<SequenceTraining> runs(seqs.size());
  parallel_for(seqs.size(), cfg.workers, [&](std::size_t s) {
    runs[s] = train_sequence(data, plan, seqs.perms()[s], SequenceId(s), out.bank.backbone, cfg);
  });
  for (auto& run : runs) {
    out.stats.merge(run.stats);
    out.bank.modules.push_back(std::move(run.modules));
  }
  return out;
}

Ensemble serving_ensemble(const ModuleBank& bank, const SequenceSet& seqs,
                          const SequenceState& state, Strategy strategy) {
  Ensemble e;
  switch (strategy) {
    case Strategy::LongSeq:
      if (auto s = select_longseq(state, seqs)) {
        e.weights.push_back(bank.composite(*s, state.active_len[s->get()]));
        e.mix.push_back(1.0);
      }
      break;
    case Strategy::MinSeq: {
      const auto chosen = select_minseq(state, seqs);
      for (SequenceId s : chosen) {
        e.weights.push_back(bank.composite(s, state.active_len[s.get()]));
        e.mix.push_back(1.0 / static_cast<double>(chosen.size()));
      }
      break;
    }
    case Strategy::AllSeq:
      for (const auto& [s, w] : select_allseq(state, seqs)) {
        e.weights.push_back(bank.composite(s, state.active_len[s.get()]));
        e.mix.push_back(w);
      }
      break;
  }
  return e;
}

namespace {

RowMatrix<double> ensemble_scores(const Ensemble& model, const RowMatrix<double>& x) {
  RowMatrix<double> scores = RowMatrix<double>::Zero(x.rows(), model.weights.front().rows());
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    scores += model.mix[i] * probabilities<double>(model.weights[i], x);
  }
  return scores;
}

}  // namespace

std::optional<Prediction> predict(const Ensemble& model, const Vector<double>& x) {
  if (model.empty()) return std::nullopt;
  const RowMatrix<double> row = x.transpose();
  const RowMatrix<double> scores = ensemble_scores(model, row);
  Prediction p;
  p.scores = scores.row(0).transpose();
  if (model.weights.size() == 1) {
    // Single model: decide on the raw logits.
    const RowMatrix<double> logits = row * model.weights.front().transpose();
    p.label = argmax(logits.row(0));
  } else {
    p.label = argmax(p.scores);
  }
  return p;
}

std::optional<Prediction> predict(const ModuleBank& bank, const SequenceSet& seqs,
                                  const SequenceState& state, Strategy strategy,
                                  const Vector<double>& x) {
  return predict(serving_ensemble(bank, seqs, state, strategy), x);
}

std::optional<double> evaluate(const Ensemble& model, const Samples<double>& test) {
  if (test.empty()) throw config_error("evaluate: empty test split");
  if (model.empty()) return std::nullopt;
  std::size_t correct = 0;
  if (model.weights.size() == 1) {
    const RowMatrix<double> logits = test.features * model.weights.front().transpose();
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (argmax(logits.row(static_cast<Eigen::Index>(i))) == test.labels[i]) ++correct;
    }
  } else {
    const RowMatrix<double> scores = ensemble_scores(model, test.features);
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (argmax(scores.row(static_cast<Eigen::Index>(i))) == test.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::optional<double> evaluate(const ModuleBank& bank, const SequenceSet& seqs,
                               const SequenceState& state, Strategy strategy,
                               const Samples<double>& test) {
  return evaluate(serving_ensemble(bank, seqs, state, strategy), test);
}

StackModel train_fedavg(const Dataset& data, const std::vector<ClientId>& clients,
                        const RowMatrix<double>& backbone, std::size_t stack_size,
                        const TrainConfig& cfg, std::uint64_t domain, TrainStats* stats) {
  StackModel model;
  model.backbone = backbone;
  model.adapters.assign(std::max<std::size_t>(1, stack_size),
                        RowMatrix<double>::Zero(backbone.rows(), backbone.cols()));
  std::vector<Participant> participants;
  for (ClientId c : clients) {
    Samples<double> local = data.client_data(c);
    if (!local.empty()) participants.push_back({c, std::move(local)});
  }
  if (participants.empty()) return model;
  for (std::size_t round = 0; round < cfg.baseline_rounds; ++round) {
    model.adapters = federated_round(backbone, model.adapters, participants, cfg,
                                     RoundKey{domain, 0, 0, round}, stats);
  }
  return model;
}

}  // namespace fedsgt
