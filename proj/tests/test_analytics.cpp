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
#include <set>

#include <doctest.h>

#include "fedsgt/analytics.hpp"
#include "fedsgt/sequencing.hpp"
#include "oracles.hpp"

using namespace fedsgt;
using namespace fedsgt::analytics;
using combinatorics::to_double;

namespace {

ExactRatio frac(std::uint64_t n, std::uint64_t d) { return ExactRatio(n) / ExactRatio(d); }

// Pr(M = m) by enumerating all L^r ordered outcomes.
ExactRatio enum_prob_m(int L, int r, int m) {
  std::uint64_t hits = 0, total = 0;
  oracle::for_each_tuple(L, r, [&](const std::vector<int>& t) {
    ++total;
    if (static_cast<int>(std::set<int>(t.begin(), t.end()).size()) == m) ++hits;
  });
  return frac(hits, total);
}

// Pr(max gap <= s | M = m) over all m-subsets of a cycle of length L.
ExactRatio enum_gap_le(int L, int m, int s) {
  std::uint64_t hits = 0, total = 0;
  oracle::for_each_subset(L, m, [&](const std::vector<int>& sub) {
    ++total;
    if (oracle::max_gap(L, sub) <= s) ++hits;
  });
  return frac(hits, total);
}

ExactRatio enum_span_given_m(int L, int m) {
  std::uint64_t sum = 0, total = 0;
  oracle::for_each_subset(L, m, [&](const std::vector<int>& sub) {
    ++total;
    sum += static_cast<std::uint64_t>(oracle::span_by_arcs(L, std::set<int>(sub.begin(), sub.end())));
  });
  return frac(sum, total);
}

ExactRatio enum_span(int L, int r) {
  std::uint64_t sum = 0, total = 0;
  oracle::for_each_tuple(L, r, [&](const std::vector<int>& t) {
    ++total;
    sum += static_cast<std::uint64_t>(oracle::span_by_arcs(L, std::set<int>(t.begin(), t.end())));
  });
  return frac(sum, total);
}

}  // namespace

TEST_CASE("deletion rates") {
  CHECK(deletion_rate_fedsgt(10, 10) == doctest::Approx(29.2897).epsilon(1e-5));
  CHECK(deletion_rate_fedsgt(1, 1) == 1.0);
  CHECK(deletion_rate_fedsgt(6, 3) == doctest::Approx(11.0));
  // Budgets beyond L add no rotation heads.
  CHECK(deletion_rate_fedsgt(6, 20) == deletion_rate_fedsgt(6, 6));
  CHECK(deletion_rate_fedcio(5) == doctest::Approx(11.4167).epsilon(1e-5));
  CHECK(deletion_rate_fedcio(1) == 1.0);
  CHECK(deletion_rate_fedcio(2) == doctest::Approx(3.0));
  CHECK(deletion_rate_fedsgt(10, 10) / deletion_rate_fedcio(5) > 2.5);
}

TEST_CASE("prob_m_distinct matches enumeration") {
  CHECK(prob_m_distinct(6, 2, 1) == frac(1, 6));
  CHECK(prob_m_distinct(6, 2, 2) == frac(5, 6));
  CHECK(prob_m_distinct(4, 1, 1) == ExactRatio(1));
  CHECK(prob_m_distinct(5, 0, 0) == ExactRatio(1));
  CHECK(prob_m_distinct(5, 3, 4) == ExactRatio(0));
  for (int L = 1; L <= 5; ++L) {
    for (int r = 1; r <= 5; ++r) {
      for (int m = 1; m <= std::min(r, L); ++m) {
        CHECK(prob_m_distinct(L, r, m) == enum_prob_m(L, r, m));
      }
    }
  }
}

TEST_CASE("prob_m_distinct sums to one") {
  for (std::uint64_t L = 1; L <= 20; ++L) {
    for (std::uint64_t r = 1; r <= 20; ++r) {
      ExactRatio total = 0;
      for (std::uint64_t m = 1; m <= std::min(r, L); ++m) total += prob_m_distinct(L, r, m);
      CHECK(total == ExactRatio(1));
    }
  }
}

TEST_CASE("prob_max_gap_le matches subset enumeration") {
  CHECK(prob_max_gap_le(6, 1, 5) == ExactRatio(0));
  CHECK(prob_max_gap_le(6, 1, 6) == ExactRatio(1));
  // Only the composition (3, 3) of 6 keeps both parts within 3.
  CHECK(prob_max_gap_le(6, 2, 3) == frac(1, 5));
  CHECK(prob_max_gap_le(6, 2, 0) == ExactRatio(0));
  for (int L = 1; L <= 9; ++L) {
    for (int m = 1; m <= L; ++m) {
      for (int s = 0; s <= L; ++s) CHECK(prob_max_gap_le(L, m, s) == enum_gap_le(L, m, s));
    }
  }
}

TEST_CASE("prob_max_gap_le is a distribution function in s") {
  for (std::uint64_t L = 1; L <= 20; ++L) {
    for (std::uint64_t m = 1; m <= L; ++m) {
      ExactRatio prev = 0;
      for (std::uint64_t s = 0; s <= L; ++s) {
        const ExactRatio p = prob_max_gap_le(L, m, s);
        CHECK(p >= prev);
        prev = p;
      }
      CHECK(prob_max_gap_le(L, m, L - m + 1) == ExactRatio(1));
    }
  }
}

TEST_CASE("expected span") {
  CHECK(expected_span_given_m(6, 1) == 1.0);
  for (std::uint64_t L = 1; L <= 12; ++L) CHECK(expected_span_given_m(L, L) == static_cast<double>(L));
  // Mean span over all 15 pairs: 6 adjacent pairs span 2, 6 at distance 2 span 3, 3 opposite span 4.
  CHECK(expected_span_given_m_exact(6, 2) == frac(2 * 6 + 3 * 6 + 4 * 3, 15));
  for (int L = 1; L <= 10; ++L) {
    for (int m = 1; m <= L; ++m) CHECK(expected_span_given_m_exact(L, m) == enum_span_given_m(L, m));
  }
  CHECK(expected_span(10, 0) == 0.0);
  CHECK(expected_span(6, 1) == 1.0);
  for (int L = 1; L <= 6; ++L) {
    for (int r = 1; r <= 5; ++r) CHECK(expected_span_exact(L, r) == enum_span(L, r));
  }
}

TEST_CASE("expected remaining data") {
  CHECK(expected_remaining_fedsgt(50000, 10, 0) == 50000.0);
  CHECK(expected_remaining_fedsgt(50000, 10, 1) == doctest::Approx(45000.0));
  CHECK_FALSE(expected_remaining_fedsgt(50000, 10, 5, 3).has_value());
  CHECK(*expected_remaining_fedsgt(50000, 10, 10, 3) == expected_remaining_fedsgt(50000, 10, 3));
  CHECK(expected_remaining_fedcio(50000, 5, 0) == 50000.0);
  CHECK(expected_remaining_fedcio(50000, 5, 1) == doctest::Approx(40000.0));
  CHECK(expected_remaining_fedcio(50000, 5, 10) == doctest::Approx(50000.0 * std::pow(0.8, 10)));

  // Best surviving rotation prefix, enumerated over every ordered outcome.
  for (int L = 2; L <= 6; ++L) {
    for (int r = 1; r <= 5; ++r) {
      double sum = 0.0;
      std::uint64_t total = 0;
      oracle::for_each_tuple(L, r, [&](const std::vector<int>& t) {
        ++total;
        sum += oracle::best_rotation_prefix(L, std::set<int>(t.begin(), t.end()));
      });
      const double oracle_value = 6000.0 / L * sum / static_cast<double>(total);
      CHECK(expected_remaining_fedsgt(6000, L, r) == doctest::Approx(oracle_value).epsilon(1e-12));
    }
  }
  for (int c = 1; c <= 5; ++c) {
    for (int r = 0; r <= 5; ++r) {
      double untouched = 0.0;
      std::uint64_t total = 0;
      oracle::for_each_tuple(c, r, [&](const std::vector<int>& t) {
        ++total;
        untouched += c - static_cast<int>(std::set<int>(t.begin(), t.end()).size());
      });
      CHECK(expected_remaining_fedcio(6000, c, r) ==
            doctest::Approx(6000.0 / c * untouched / static_cast<double>(total)).epsilon(1e-12));
    }
  }
}

TEST_CASE("FedSGT keeps more data than FedCIO at the default scale") {
  for (std::uint64_t r = 1; r <= 25; ++r) {
    CHECK(expected_remaining_fedsgt(50000, 10, r) >= expected_remaining_fedcio(50000, 5, r));
  }
}

TEST_CASE("prob_k_groups") {
  for (std::uint64_t L = 1; L <= 8; ++L) CHECK(prob_k_groups(L, 1, 1) == ExactRatio(1));
  CHECK(prob_k_groups(2, 2, 1) == frac(1, 2));
  CHECK(prob_k_groups(2, 2, 2) == frac(1, 2));
  for (int L = 1; L <= 5; ++L) {
    for (int S = 1; S <= 5; ++S) {
      for (int k = 1; k <= std::min(L, S); ++k) {
        std::uint64_t hits = 0, total = 0;
        oracle::for_each_tuple(L, S, [&](const std::vector<int>& t) {
          ++total;
          if (static_cast<int>(std::set<int>(t.begin(), t.end()).size()) == k) ++hits;
        });
        CHECK(prob_k_groups(L, S, k) == frac(hits, total));
      }
    }
  }
  for (std::uint64_t L = 1; L <= 20; ++L) {
    for (std::uint64_t S = 1; S <= 20; ++S) {
      ExactRatio total = 0;
      for (std::uint64_t k = 1; k <= std::min(L, S); ++k) total += prob_k_groups(L, S, k);
      CHECK(total == ExactRatio(1));
    }
  }
}

TEST_CASE("expected communication cost") {
  CHECK(expected_comm_cost(2, 2) == doctest::Approx(3.5));
  CHECK(expected_comm_cost(1, 1) == doctest::Approx(1.0));
  CHECK(expected_comm_cost(10, 2) == doctest::Approx(71.5));
  for (int L = 1; L <= 6; ++L) {
    for (int S = 1; S <= 4; ++S) {
      std::uint64_t sum = 0, total = 0;
      oracle::for_each_tuple(L, S, [&](const std::vector<int>& t) {
        ++total;
        sum += static_cast<std::uint64_t>(oracle::rotation_rounds(L, t));
      });
      CHECK(expected_comm_cost_exact(L, S) == frac(sum, total));
    }
  }
}

TEST_CASE("matched budget and training cost") {
  CHECK(matched_budget(10, 10) == doctest::Approx(18.18).epsilon(1e-3));
  CHECK(matched_budget(1, 1) == 1.0);
  CHECK(matched_budget(5, 9) == doctest::Approx(9.0));

  AnalyticParams p;
  p.T = 10;
  p.E = 3;
  p.D = 1000;
  p.P = 50;
  p.L = 10;
  p.B = 10;
  CHECK(training_cost(Method::FedAvg, p) == doctest::Approx(1.5e7));
  CHECK(training_cost(Method::FedSGT, p) == doctest::Approx(8.25e6));
  CHECK(training_cost(Method::FedCIO, p) == training_cost(Method::FedAvg, p));

  // At the matched budget the two costs coincide.
  p.B = 0;
  const double b = matched_budget(p.T, p.L);
  const double sgt_per_sequence = training_cost(Method::FedSGT, [&] {
    AnalyticParams q = p;
    q.B = 1;
    return q;
  }());
  CHECK(sgt_per_sequence * b == doctest::Approx(training_cost(Method::FedAvg, p)));

  CHECK(comm_rounds_fedavg(10) == 10.0);
  CHECK(comm_rounds_fedcio(10, 2) == 12.0);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::FedAvg, Method::FedCIO, Method::FedSGT}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("SISA"), Error);
}
