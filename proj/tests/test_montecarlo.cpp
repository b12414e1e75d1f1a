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

#include "fedsgt/analytics.hpp"
#include "fedsgt/montecarlo.hpp"

using namespace fedsgt;
using namespace fedsgt::montecarlo;

namespace {

MCConfig mc(std::size_t trials, std::uint64_t seed = 1) {
  MCConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

bool within(const MCEstimate& e, double value, double k = 4.0) {
  return std::abs(e.mean - value) <= k * e.std_error + 1e-12;
}

}  // namespace

TEST_CASE("degenerate estimators are exact") {
  const MCEstimate one = mc_deletion_rate_fedsgt(1, 1, mc(1000));
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK(mc_expected_span(7, 0, mc(500)).mean == 0.0);
  CHECK(mc_expected_span(6, 1, mc(500)).mean == 1.0);
  CHECK(mc_expected_remaining(analytics::Method::FedSGT, 50000, 10, 0, mc(500)).mean == 50000.0);
  CHECK(mc_expected_remaining(analytics::Method::FedCIO, 50000, 5, 0, mc(500)).mean == 50000.0);
  CHECK(mc_comm_cost(1, 1, mc(500)).mean == 1.0);
  CHECK(mc_deletion_rate_fedcio(1, mc(500)).mean == 1.0);
}

TEST_CASE("estimators agree with closed forms") {
  const MCConfig cfg = mc(200000, 7);
  CHECK(within(mc_deletion_rate_fedsgt(10, 10, cfg), 29.2897));
  CHECK(within(mc_deletion_rate_fedsgt(6, 3, cfg), 11.0));
  CHECK(within(mc_deletion_rate_fedcio(2, cfg), 3.0));
  CHECK(within(mc_expected_span(10, 5, cfg), analytics::expected_span(10, 5)));
  CHECK(within(mc_expected_remaining(analytics::Method::FedCIO, 50000, 5, 10, cfg),
               50000 * std::pow(0.8, 10)));
  CHECK(within(mc_expected_remaining(analytics::Method::FedSGT, 50000, 10, 1, cfg), 45000.0));
  const MCEstimate r10 = mc_expected_remaining(analytics::Method::FedSGT, 50000, 10, 10, cfg);
  CHECK(std::abs(r10.mean / analytics::expected_remaining_fedsgt(50000, 10, 10) - 1.0) < 0.01);
  CHECK(within(mc_comm_cost(2, 2, cfg), 3.5));
  CHECK(within(mc_comm_cost(10, 2, cfg), analytics::expected_comm_cost(10, 2)));
  double mean_k = 0.0;
  for (std::uint64_t k = 1; k <= 3; ++k) {
    mean_k += static_cast<double>(k) * combinatorics::to_double(analytics::prob_k_groups(6, 3, k));
  }
  CHECK(within(mc_client_groups(6, 3, cfg), mean_k));
}

TEST_CASE("finite pools shorten the FedSGT deletion rate only slightly") {
  const MCConfig cfg = mc(20000, 3);
  const MCEstimate large = mc_deletion_rate_fedsgt_finite(10, 10, 1000, cfg);
  CHECK(std::abs(large.mean - analytics::deletion_rate_fedsgt(10, 10)) < 0.5);
  const MCEstimate tiny = mc_deletion_rate_fedsgt_finite(4, 4, 1, cfg);
  CHECK(tiny.mean <= 4.0);
}

TEST_CASE("estimates do not depend on the worker count") {
  MCConfig cfg = mc(30000, 11);
  const MCEstimate a = mc_expected_span(10, 5, cfg);
  cfg.workers = 4;
  const MCEstimate b = mc_expected_span(10, 5, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.trials == b.trials);
}

TEST_CASE("run_trials statistics") {
  const MCEstimate e = run_trials(mc(10000), 1, [](SplitMix64& rng) { return rng.uniform(); });
  CHECK(e.trials == 10000);
  CHECK(e.mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(e.std_error == doctest::Approx(std::sqrt(1.0 / 12.0) / 100.0).epsilon(0.05));
  const MCEstimate single = run_trials(mc(1), 1, [](SplitMix64&) { return 2.0; });
  CHECK(single.mean == 2.0);
  CHECK(std::isfinite(single.std_error));
}

TEST_CASE("z-scores") {
  MCEstimate e{10.0, 0.5, 100};
  CHECK(zscore(9.0, e) == doctest::Approx(2.0));
  MCEstimate flat{3.0, 0.0, 100};
  CHECK(zscore(3.0, flat) == 0.0);
  CHECK(std::isinf(zscore(2.0, flat)));
  CHECK(zscore(2.0, flat, 50.0) == doctest::Approx(2.0));
}

TEST_CASE("validation grid") {
  // A reduced trial count with a wider band; the full-size run lives in the
  // acceptance suite.
  ValidationGrid grid;
  MCConfig cfg = mc(20000, 5);
  cfg.confidence_k = 4.0;
  const auto rows = run_validation(grid, cfg);
  CHECK(rows.size() == 57);
  for (const auto& r : rows) {
    CAPTURE(r.quantity);
    CAPTURE(r.params);
    CHECK(r.pass);
  }
  const auto broken = run_validation(grid, cfg, [](const std::string& q, double v) {
    return q == "expected_span" ? v + 0.5 : v;
  });
  std::size_t failures = 0;
  for (const auto& r : broken) failures += r.pass ? 0 : 1;
  CHECK(failures > 0);
}
