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

#include "fedsgt/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "fedsgt/core_types.hpp"

namespace fedsgt::analytics {

using combinatorics::binomial;
using combinatorics::factorial;
using combinatorics::harmonic;
using combinatorics::power;
using combinatorics::stirling2;
using combinatorics::to_double;

const char* to_string(Method m) {
  switch (m) {
    case Method::FedAvg: return "FedAvg";
    case Method::FedCIO: return "FedCIO";
    case Method::FedSGT: return "FedSGT";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "FedAvg") return Method::FedAvg;
  if (name == "FedCIO") return Method::FedCIO;
  if (name == "FedSGT") return Method::FedSGT;
  throw domain_error("unknown method '" + name + "'");
}

double deletion_rate_fedsgt(std::uint64_t L, std::uint64_t B) {
  if (L == 0 || B == 0) throw domain_error("deletion_rate_fedsgt: L and B must be >= 1");
  return to_double(ExactRatio(L) * harmonic(std::min(L, B)));
}

double deletion_rate_fedcio(std::uint64_t c) {
  if (c == 0) throw domain_error("deletion_rate_fedcio: c must be >= 1");
  return to_double(ExactRatio(c) * harmonic(c));
}

ExactRatio prob_m_distinct(std::uint64_t L, std::uint64_t r, std::uint64_t m) {
  if (r == 0) return ExactRatio(m == 0 ? 1 : 0);
  if (m == 0 || m > std::min(r, L)) return ExactRatio(0);
  const ExactInteger ways = binomial(L, m) * factorial(m) * stirling2(r, m);
  return ExactRatio(ways, power(L, r));
}

ExactRatio prob_max_gap_le(std::uint64_t L, std::uint64_t m, std::uint64_t s) {
  if (m == 0 || m > L) throw domain_error("prob_max_gap_le: require 1 <= m <= L");
  if (s == 0) return ExactRatio(0);
  ExactInteger count(0);
  const std::uint64_t jmax = (L - m) / s;
  for (std::uint64_t j = 0; j <= jmax; ++j) {
    ExactInteger term = binomial(m, j) * binomial(L - 1 - j * s, m - 1);
    if (j % 2 == 0) {
      count += term;
    } else {
      count -= term;
    }
  }
  return ExactRatio(count, binomial(L - 1, m - 1));
}

ExactRatio expected_span_given_m_exact(std::uint64_t L, std::uint64_t m) {
  if (m == 0 || m > L) throw domain_error("expected_span_given_m: require 1 <= m <= L");
  ExactRatio sum(1);
  for (std::uint64_t s = 1; s < L; ++s) sum += prob_max_gap_le(L, m, s);
  return sum;
}

double expected_span_given_m(std::uint64_t L, std::uint64_t m) {
  return to_double(expected_span_given_m_exact(L, m));
}

ExactRatio expected_span_exact(std::uint64_t L, std::uint64_t r) {
  if (L == 0) throw domain_error("expected_span: L must be >= 1");
  ExactRatio sum(0);
  for (std::uint64_t m = 1; m <= std::min(r, L); ++m) {
    sum += prob_m_distinct(L, r, m) * expected_span_given_m_exact(L, m);
  }
  return sum;
}

double expected_span(std::uint64_t L, std::uint64_t r) {
  return to_double(expected_span_exact(L, r));
}

double expected_remaining_fedsgt(std::uint64_t D, std::uint64_t L, std::uint64_t r) {
  if (L == 0) throw domain_error("expected_remaining_fedsgt: L must be >= 1");
  const ExactRatio remaining = ExactRatio(D, L) * (ExactRatio(L) - expected_span_exact(L, r));
  return to_double(remaining);
}

std::optional<double> expected_remaining_fedsgt(std::uint64_t D, std::uint64_t L,
                                                std::uint64_t B, std::uint64_t r) {
  if (B < L) return std::nullopt;
  return expected_remaining_fedsgt(D, L, r);
}

double expected_remaining_fedcio(std::uint64_t D, std::uint64_t c, std::uint64_t r) {
  if (c == 0) throw domain_error("expected_remaining_fedcio: c must be >= 1");
  const ExactRatio keep(c - 1, c);
  ExactRatio acc(D);
  for (std::uint64_t i = 0; i < r; ++i) acc *= keep;
  return to_double(acc);
}

ExactRatio prob_k_groups(std::uint64_t L, std::uint64_t S, std::uint64_t k) {
  if (k == 0 || k > std::min(S, L)) return ExactRatio(0);
  const ExactInteger ways = binomial(L, k) * factorial(k) * stirling2(S, k);
  return ExactRatio(ways, power(L, S));
}

ExactRatio expected_comm_cost_exact(std::uint64_t L, std::uint64_t S) {
  if (L == 0 || S == 0) throw domain_error("expected_comm_cost: L and S must be >= 1");
  ExactRatio sum(0);
  for (std::uint64_t k = 1; k <= std::min(S, L); ++k) {
    sum += prob_k_groups(L, S, k) * ExactRatio(k, k + 1);
  }
  return ExactRatio(L * (L + 1)) * sum;
}

double expected_comm_cost(std::uint64_t L, std::uint64_t S) {
  return to_double(expected_comm_cost_exact(L, S));
}

double matched_budget(std::uint64_t T, std::uint64_t L) {
  if (T == 0 || L == 0) throw domain_error("matched_budget: T and L must be >= 1");
  return 2.0 * static_cast<double>(T) * static_cast<double>(L) / static_cast<double>(L + 1);
}

double training_cost(Method method, const AnalyticParams& p) {
  const double T = static_cast<double>(p.T);
  const double E = static_cast<double>(p.E);
  const double D = static_cast<double>(p.D);
  const double P = static_cast<double>(p.P);
  const double L = static_cast<double>(p.L);
  const double B = static_cast<double>(p.B);
  switch (method) {
    case Method::FedAvg:
    case Method::FedCIO:
      return T * E * D * P * L;
    case Method::FedSGT:
      return B * E * ((L + 1.0) / 2.0) * D * P;
  }
  throw domain_error("training_cost: unknown method");
}

double comm_rounds_fedavg(std::uint64_t T) { return static_cast<double>(T); }

double comm_rounds_fedcio(std::uint64_t T, std::uint64_t t_cluster) {
  return static_cast<double>(T + t_cluster);
}

}  // namespace fedsgt::analytics
