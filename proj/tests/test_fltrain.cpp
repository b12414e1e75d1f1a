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

#include <cmath>

#include <doctest.h>

#include "fedsgt/bank_io.hpp"
#include "fedsgt/fltrain.hpp"
#include "fedsgt/model.hpp"

using namespace fedsgt;

namespace {

Dataset small_data(std::uint64_t seed = 5, std::size_t clients = 4, std::size_t slices = 3) {
  SynthSpec spec;
  spec.clients = clients;
  spec.samples_per_client = 60;
  spec.slices_per_client = slices;
  spec.feature_dim = 6;
  spec.label_count = 3;
  spec.test_samples = 300;
  spec.seed = seed;
  return synth_dataset(spec);
}

TrainConfig small_cfg() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.seed = 13;
  return cfg;
}

Samples<double> first_rows(const Samples<double>& s, std::size_t n) {
  Samples<double> out;
  out.features = s.features.topRows(static_cast<Eigen::Index>(n));
  out.labels.assign(s.labels.begin(), s.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

}  // namespace

TEST_CASE_TEMPLATE("gradient matches finite differences", Scalar, double, float) {
  SplitMix64 rng(3);
  RowMatrix<Scalar> w(3, 4);
  RowMatrix<Scalar> x(5, 4);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(rng.normal());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<Scalar>(rng.normal());
  const std::vector<int> y{0, 2, 1, 1, 0};
  Samples<Scalar> batch{x, y};
  const RowMatrix<Scalar> g = cross_entropy_gradient<Scalar>(w, x, y);
  const double h = std::is_same_v<Scalar, float> ? 1e-2 : 1e-6;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    RowMatrix<Scalar> plus = w, minus = w;
    plus.data()[i] += static_cast<Scalar>(h);
    minus.data()[i] -= static_cast<Scalar>(h);
    const double numeric =
        (static_cast<double>(cross_entropy<Scalar>(plus, batch)) -
         static_cast<double>(cross_entropy<Scalar>(minus, batch))) / (2 * h);
    CHECK(static_cast<double>(g.data()[i]) ==
          doctest::Approx(numeric).epsilon(std::is_same_v<Scalar, float> ? 2e-2 : 1e-6));
  }
}

TEST_CASE("softmax rows sum to one and argmax picks the first maximum") {
  RowMatrix<double> z(2, 3);
  z << 1000, 1000, -5, 0, 1, 2;
  softmax_rows_inplace(z);
  CHECK(z.row(0).sum() == doctest::Approx(1.0));
  CHECK(z(0, 0) == doctest::Approx(0.5));
  CHECK(argmax(z.row(0)) == 0);
  CHECK(argmax(z.row(1)) == 2);
}

TEST_CASE("zero epochs leave modules at zero") {
  const Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 1);
  const SequenceSet seqs = build_sequences(4, 2, 1);
  TrainConfig cfg = small_cfg();
  cfg.epochs = 0;
  const BankTraining run = train_bank(data, plan, seqs, cfg);
  for (const auto& seq : run.bank.modules) {
    for (const auto& m : seq) CHECK(m.weights.isZero(0.0));
  }
  CHECK(run.stats.parameter_updates == 0);
}

TEST_CASE("first phase involves only the clients of the first group") {
  const Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 1);
  const SequenceSet seqs = build_sequences(4, 4, 1);
  const auto backbone = make_backbone(data.label_count, data.feature_dim, small_cfg());
  const Permutation& order = seqs[SequenceId(2)];
  const SequenceTraining one =
      train_sequence(data, plan, order, SequenceId(2), backbone, small_cfg(), 1);
  std::vector<bool> in_group(data.client_count(), false);
  std::uint64_t samples = 0;
  for (const SliceRef& s : plan.group(order[0])) {
    in_group[s.client.get()] = true;
    samples += plan.samples_of(s);
  }
  for (std::size_t c = 0; c < data.client_count(); ++c) {
    const std::uint64_t joined = c < one.stats.client_rounds.size() ? one.stats.client_rounds[c] : 0;
    CHECK(joined == (in_group[c] ? 1u : 0u));
  }
  REQUIRE(one.modules.size() == 1);
  CHECK(one.modules[0].samples == samples);
  CHECK(one.modules[0].group == order[0]);
}

TEST_CASE("prefix determinism and frozen modules") {
  const Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 2);
  const SequenceSet seqs = build_sequences(4, 4, 2);
  const TrainConfig cfg = small_cfg();
  const auto backbone = make_backbone(data.label_count, data.feature_dim, cfg);
  const auto backbone_bytes = serialize_matrix(backbone);
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const SequenceTraining full = train_sequence(data, plan, seqs.perms()[s], SequenceId(s), backbone, cfg);
    for (std::size_t p = 1; p <= 4; ++p) {
      const SequenceTraining part =
          train_sequence(data, plan, seqs.perms()[s], SequenceId(s), backbone, cfg, p);
      REQUIRE(part.modules.size() == p);
      for (std::size_t i = 0; i < p; ++i) {
        CHECK(serialize_module(part.modules[i]) == serialize_module(full.modules[i]));
      }
    }
  }
  CHECK(serialize_matrix(backbone) == backbone_bytes);
}

TEST_CASE("later phases do not depend on data outside their prefix") {
  Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 2);
  const SequenceSet seqs = build_sequences(4, 4, 2);
  const TrainConfig cfg = small_cfg();
  const auto backbone = make_backbone(data.label_count, data.feature_dim, cfg);
  const Permutation& order = seqs[SequenceId(0)];
  const SequenceTraining before = train_sequence(data, plan, order, SequenceId(0), backbone, cfg);
  // Drop records from the last group; the first three modules must not move.
  for (const SliceRef& s : plan.group(order[3])) data.slice(s).erase_front(5);
  const SequenceTraining after = train_sequence(data, plan, order, SequenceId(0), backbone, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serialize_module(before.modules[i]) == serialize_module(after.modules[i]));
  }
  CHECK(serialize_module(before.modules[3]) != serialize_module(after.modules[3]));
}

TEST_CASE("full-batch loss does not increase across local epochs") {
  const Dataset data = small_data(7);
  TrainConfig cfg = small_cfg();
  cfg.epochs = 1;
  const auto backbone = make_backbone(data.label_count, data.feature_dim, cfg);
  for (std::size_t c = 0; c < data.client_count(); ++c) {
    const Samples<double> local = data.client_data(ClientId(c));
    cfg.batch_size = local.size();
    std::vector<RowMatrix<double>> trainable{RowMatrix<double>::Zero(backbone.rows(), backbone.cols())};
    SplitMix64 rng(c);
    double prev = cross_entropy<double>(backbone + trainable[0], local);
    for (int epoch = 0; epoch < 10; ++epoch) {
      trainable = local_update(backbone, trainable, local, cfg, rng);
      const double loss = cross_entropy<double>(backbone + trainable[0], local);
      CHECK(loss <= prev + 1e-12);
      prev = loss;
    }
  }
}

TEST_CASE("local updates train every matrix of a stack identically") {
  const Dataset data = small_data();
  const TrainConfig cfg = small_cfg();
  const auto backbone = make_backbone(data.label_count, data.feature_dim, cfg);
  std::vector<RowMatrix<double>> stack(3, RowMatrix<double>::Zero(backbone.rows(), backbone.cols()));
  SplitMix64 rng(1);
  TrainStats stats;
  const Samples<double> local = data.client_data(ClientId(0));
  const auto out = local_update(backbone, stack, local, cfg, rng, &stats);
  CHECK(out[0] == out[1]);
  CHECK(out[1] == out[2]);
  CHECK(stats.parameter_updates ==
        cfg.epochs * local.size() * static_cast<std::uint64_t>(backbone.size()) * 3);
}

TEST_CASE("federated averaging") {
  const Dataset data = small_data();
  const TrainConfig cfg = small_cfg();
  const auto backbone = make_backbone(data.label_count, data.feature_dim, cfg);
  const std::vector<RowMatrix<double>> start{RowMatrix<double>::Zero(backbone.rows(), backbone.cols())};
  const RoundKey key{7, 1, 2, 3};
  auto local = [&](ClientId c, const Samples<double>& s) {
    SplitMix64 rng = derive_stream(cfg.seed, {key.domain, key.a, key.b, key.round, c.value});
    return local_update(backbone, start, s, cfg, rng).front();
  };

  SUBCASE("one participant passes its update through") {
    const Samples<double> s = data.client_data(ClientId(1));
    const auto avg = federated_round(backbone, start, {{ClientId(1), s}}, cfg, key);
    CHECK(avg.front() == local(ClientId(1), s));
  }
  SUBCASE("identical participants average to either result") {
    Samples<double> s = data.client_data(ClientId(0));
    TrainConfig full = cfg;
    full.batch_size = s.size();
    const auto avg = federated_round(backbone, start, {{ClientId(0), s}, {ClientId(1), s}}, full, key);
    SplitMix64 rng(0);
    const auto single = local_update(backbone, start, s, full, rng).front();
    CHECK((avg.front() - single).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("sample counts weight the average") {
    const Dataset big = small_data(9, 8);
    Samples<double> all = big.client_data(ClientId(0));
    for (std::size_t c = 1; c < big.client_count(); ++c) all.append(big.client_data(ClientId(c)));
    REQUIRE(all.size() >= 300);
    Samples<double> small = first_rows(all, 100);
    Samples<double> large = first_rows(all, 300);
    const auto avg = federated_round(backbone, start, {{ClientId(3), large}, {ClientId(2), small}}, cfg, key);
    const RowMatrix<double> expected =
        0.25 * local(ClientId(2), small) + 0.75 * local(ClientId(3), large);
    CHECK((avg.front() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(federated_round(backbone, start, {}, cfg, key), Error);
}

TEST_CASE("divergent training is reported") {
  const Dataset data = small_data();
  TrainConfig cfg = small_cfg();
  cfg.backbone_scale = 1e308;  // overflows to infinity in the backbone
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 1);
  const SequenceSet seqs = build_sequences(4, 1, 1);
  try {
    train_bank(data, plan, seqs, cfg);
    FAIL("expected a training error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Training);
  }
}

TEST_CASE("serving and evaluation") {
  SynthSpec spec;
  spec.clients = 6;
  spec.samples_per_client = 120;
  spec.slices_per_client = 2;
  spec.feature_dim = 10;
  spec.label_count = 4;
  spec.seed = 2;
  const Dataset data = synth_dataset(spec);
  const GroupingPlan plan = build_grouping(data.catalog(), 6, 3);
  const SequenceSet seqs = build_sequences(6, 6, 3);
  TrainConfig cfg;
  cfg.seed = 3;
  const BankTraining run = train_bank(data, plan, seqs, cfg);
  const SequenceState fresh = initial_state(seqs);

  CHECK(*evaluate(run.bank, seqs, fresh, Strategy::AllSeq, data.test) > 0.9);

  const Vector<double> x = data.test.features.row(0).transpose();
  const auto p = predict(run.bank, seqs, fresh, Strategy::LongSeq, x);
  REQUIRE(p.has_value());
  const Vector<double> logits = run.bank.composite(SequenceId(0), 6) * x;
  CHECK(p->label == argmax(logits));

  // Six-group timeline, blend after the second deletion.
  SequenceState t2 = apply_deletion(fresh, seqs, GroupId(1));
  t2 = apply_deletion(std::move(t2), seqs, GroupId(5));
  const Ensemble blend = serving_ensemble(run.bank, seqs, t2, Strategy::AllSeq);
  REQUIRE(blend.mix.size() == 4);
  CHECK(blend.mix[3] == doctest::Approx(3.0 / 7));
  CHECK(blend.weights[3] == run.bank.composite(SequenceId(4), 3));

  // One survivor: every strategy serves the same model.
  SequenceState lone = fresh;
  for (int g : {0, 1, 2, 3, 5}) lone = apply_deletion(std::move(lone), seqs, GroupId(g));
  const auto a = evaluate(run.bank, seqs, lone, Strategy::AllSeq, data.test);
  CHECK(a == evaluate(run.bank, seqs, lone, Strategy::MinSeq, data.test));
  CHECK(a == evaluate(run.bank, seqs, lone, Strategy::LongSeq, data.test));
  CHECK(predict(run.bank, seqs, lone, Strategy::AllSeq, x)->scores ==
        predict(run.bank, seqs, lone, Strategy::LongSeq, x)->scores);

  SequenceState dead = fresh;
  for (int g = 0; g < 6; ++g) dead = apply_deletion(std::move(dead), seqs, GroupId(g));
  CHECK_FALSE(evaluate(run.bank, seqs, dead, Strategy::AllSeq, data.test).has_value());
  CHECK_FALSE(predict(run.bank, seqs, dead, Strategy::MinSeq, x).has_value());

  // All-zero weights tie on every label; the first label wins, which on a
  // balanced test split is right 1/k of the time.
  Ensemble zero;
  zero.weights.push_back(RowMatrix<double>::Zero(4, 10));
  zero.mix.push_back(1.0);
  CHECK(*evaluate(zero, data.test) == doctest::Approx(0.25));
}

TEST_CASE("bank training is independent of the worker count") {
  const Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 2);
  const SequenceSet seqs = build_sequences(4, 4, 2);
  TrainConfig cfg = small_cfg();
  const std::string one = serialize_bank(train_bank(data, plan, seqs, cfg).bank);
  cfg.workers = 3;
  CHECK(serialize_bank(train_bank(data, plan, seqs, cfg).bank) == one);
}

TEST_CASE("bank file format") {
  const Dataset data = small_data();
  const GroupingPlan plan = build_grouping(data.catalog(), 4, 2);
  const SequenceSet seqs = build_sequences(4, 3, 2);
  const ModuleBank bank = train_bank(data, plan, seqs, small_cfg()).bank;
  const std::string bytes = serialize_bank(bank);
  CHECK(bytes.substr(0, 4) == "FSGT");
  const std::size_t cells = bank.label_count * bank.feature_dim;
  CHECK(bytes.size() == 4 + 5 * 4 + 8 * cells + 3 * 4 * (4 + 8 + 8 * cells) + 8);

  const ModuleBank back = deserialize_bank(bytes);
  CHECK(serialize_bank(back) == bytes);
  CHECK(back.sequences().perms() == seqs.perms());

  auto expect_corrupt = [](const std::string& b) {
    try {
      deserialize_bank(b);
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Corrupt;
    }
  };
  std::string flipped = bytes;
  flipped[100] = static_cast<char>(flipped[100] ^ 0x01);
  CHECK(expect_corrupt(flipped));
  CHECK(expect_corrupt(bytes.substr(0, bytes.size() - 9)));
  CHECK(expect_corrupt("XXXX" + bytes.substr(4)));
  CHECK(expect_corrupt(""));
  std::string future = bytes;
  future[4] = 9;
  CHECK(expect_corrupt(future));

  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
