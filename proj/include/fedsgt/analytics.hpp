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

#ifndef FEDSGT_ANALYTICS_HPP
#define FEDSGT_ANALYTICS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "fedsgt/combinatorics.hpp"

namespace fedsgt::analytics {

/// Symbol set shared by the closed-form calculators. B' = min(L, B) is
/// derived on demand.
struct AnalyticParams {
  std::uint64_t L = 10;  // groups
  std::uint64_t B = 10;  // training budget (sequences)
  std::uint64_t c = 5;   // FedCIO clusters
  std::uint64_t D = 50000;
  std::uint64_t r = 0;   // unlearning requests
  std::uint64_t S = 2;   // slices per client
  std::uint64_t N = 10;  // clients
  std::uint64_t T = 10;  // FL rounds
  std::uint64_t E = 1;   // local epochs
  std::uint64_t P = 1;   // trainable parameters per adapter

  std::uint64_t budget_prime() const { return L < B ? L : B; }
};

enum class Method { FedAvg, FedCIO, FedSGT };

const char* to_string(Method m);
Method parse_method(const std::string& name);

// Deletion rates: expected number of uniform requests until no model serves.
double deletion_rate_fedsgt(std::uint64_t L, std::uint64_t B);
double deletion_rate_fedcio(std::uint64_t c);

/// Pr(M = m): r uniform draws over L groups occupy exactly m of them.
/// Zero outside 1 <= m <= min(r, L); for r = 0 all mass sits at m = 0.
ExactRatio prob_m_distinct(std::uint64_t L, std::uint64_t r, std::uint64_t m);

/// Pr(max cyclic gap <= s | M = m), by inclusion-exclusion over the
/// compositions of L into m positive parts. Zero for s = 0.
ExactRatio prob_max_gap_le(std::uint64_t L, std::uint64_t m, std::uint64_t s);

ExactRatio expected_span_given_m_exact(std::uint64_t L, std::uint64_t m);
double expected_span_given_m(std::uint64_t L, std::uint64_t m);

ExactRatio expected_span_exact(std::uint64_t L, std::uint64_t r);
/// E[U] for r uniform requests; 0 when r = 0.
double expected_span(std::uint64_t L, std::uint64_t r);

/// Expected samples behind the best surviving rotation (LongSeq serving),
/// valid for B >= L.
double expected_remaining_fedsgt(std::uint64_t D, std::uint64_t L, std::uint64_t r);

/// Budget-aware variant: empty for B < L, where no closed form exists and
/// callers have to fall back to Monte Carlo.
std::optional<double> expected_remaining_fedsgt(std::uint64_t D, std::uint64_t L,
                                                std::uint64_t B, std::uint64_t r);

double expected_remaining_fedcio(std::uint64_t D, std::uint64_t c, std::uint64_t r);

/// Pr(K = k): a client's S slices, assigned independently and uniformly,
/// land in exactly k of the L groups.
ExactRatio prob_k_groups(std::uint64_t L, std::uint64_t S, std::uint64_t k);

/// Expected rounds a client joins across all L cyclic sequences.
ExactRatio expected_comm_cost_exact(std::uint64_t L, std::uint64_t S);
double expected_comm_cost(std::uint64_t L, std::uint64_t S);

/// FedSGT budget that matches the FedAvg/FedCIO training cost, 2TL/(L+1).
double matched_budget(std::uint64_t T, std::uint64_t L);

/// Parameter-update count, big-O constants dropped:
///   FedAvg, FedCIO: T * E * D * P * L
///   FedSGT:         B * E * (L + 1) / 2 * D * P
double training_cost(Method method, const AnalyticParams& p);

/// Per-client communication rounds for the baselines (T, and T_cluster + T).
double comm_rounds_fedavg(std::uint64_t T);
double comm_rounds_fedcio(std::uint64_t T, std::uint64_t t_cluster);

}  // namespace fedsgt::analytics

#endif  // FEDSGT_ANALYTICS_HPP
