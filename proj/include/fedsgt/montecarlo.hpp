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

#ifndef FEDSGT_MONTECARLO_HPP
#define FEDSGT_MONTECARLO_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fedsgt/analytics.hpp"
#include "fedsgt/rng.hpp"

namespace fedsgt::montecarlo {

struct MCConfig {
  std::size_t trials = 200000;
  std::uint64_t seed = 0;
  double confidence_k = 3.0;
  std::size_t workers = 1;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  std::size_t trials = 0;
};

/// Runs `trial` once per index with a stream derived from (seed, tag, index).
/// Trials are grouped into fixed-size chunks whose statistics are merged in
/// chunk order, so the estimate does not depend on the worker count.
MCEstimate run_trials(const MCConfig& cfg, std::uint64_t tag,
                      const std::function<double(SplitMix64&)>& trial);

/// Uniform group hits until every rotation head (first group of each of the
/// min(L, B) cyclic sequences) has been hit.
MCEstimate mc_deletion_rate_fedsgt(std::uint64_t L, std::uint64_t B, const MCConfig& cfg);

/// Same process, but requests draw units without replacement from L groups
/// of `units_per_group` units each, so group sizes shrink. Measures the
/// error of the fixed-size approximation; a trial that exhausts the pool
/// before failing counts the pool size.
MCEstimate mc_deletion_rate_fedsgt_finite(std::uint64_t L, std::uint64_t B,
                                          std::uint64_t units_per_group, const MCConfig& cfg);

/// Coupon collector over c clusters.
MCEstimate mc_deletion_rate_fedcio(std::uint64_t c, const MCConfig& cfg);

/// Cyclic span of the distinct groups among r uniform hits.
MCEstimate mc_expected_span(std::uint64_t L, std::uint64_t r, const MCConfig& cfg);

/// FedSGT: D/L * (L - span). FedCIO: D/c * (clusters never hit).
/// `units` is L for FedSGT and c for FedCIO.
MCEstimate mc_expected_remaining(analytics::Method method, std::uint64_t D, std::uint64_t units,
                                 std::uint64_t r, const MCConfig& cfg);

/// S slices assigned independently to L groups; sums L - V + 1 over the L
/// cyclic sequences, V being the first (1-based) position holding one of the
/// client's groups.
MCEstimate mc_comm_cost(std::uint64_t L, std::uint64_t S, const MCConfig& cfg);

/// Distinct groups hit by S independent uniform slice assignments.
MCEstimate mc_client_groups(std::uint64_t L, std::uint64_t S, const MCConfig& cfg);

struct ValidationGrid {
  std::vector<std::uint64_t> L{4, 6, 10};
  std::vector<std::uint64_t> c{2, 5};
  std::vector<std::uint64_t> r{1, 3, 5, 10, 20};
  std::vector<std::uint64_t> S{1, 2, 5};
  std::uint64_t D = 50000;
  /// Budgets per L; 0 stands for "B = L".
  std::vector<std::uint64_t> B{2, 0};
};

struct ValidationRow {
  std::string quantity;
  std::string params;
  double closed_form = 0.0;
  MCEstimate mc;
  double zscore = 0.0;
  bool pass = true;
};

/// Hook that lets tests perturb closed-form values to check the harness.
using ClosedFormFilter = std::function<double(const std::string& quantity, double value)>;

std::vector<ValidationRow> run_validation(const ValidationGrid& grid, const MCConfig& cfg,
                                          const ClosedFormFilter& filter = {});

/// (mc - closed) / stderr. When the sample has zero spread the denominator
/// becomes value_range / trials, the smallest shift one differing trial could
/// make; without a range a zero stderr gives 0 on exact agreement and
/// +-infinity otherwise.
double zscore(double closed_form, const MCEstimate& mc, double value_range = 0.0);

}  // namespace fedsgt::montecarlo

#endif  // FEDSGT_MONTECARLO_HPP
