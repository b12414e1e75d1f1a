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

#include "fedsgt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedsgt/core_types.hpp"
#include "fedsgt/parallel.hpp"
#include "fedsgt/sequencing.hpp"

namespace fedsgt::montecarlo {

namespace {

constexpr std::size_t kChunk = 4096;

enum Tag : std::uint64_t {
  kDeletionSgt = 1,
  kDeletionSgtFinite,
  kDeletionCio,
  kSpan,
  kRemainingSgt,
  kRemainingCio,
  kComm,
  kClientGroups,
};

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }
};

std::uint64_t tag_of(Tag t, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_seed(t, {a, b, c});
}

std::size_t span_of_hits(std::uint64_t L, std::uint64_t r, SplitMix64& rng,
                         std::vector<GroupId>& scratch) {
  scratch.clear();
  for (std::uint64_t i = 0; i < r; ++i) scratch.emplace_back(rng.bounded(L));
  return cyclic_span(L, scratch);
}

}  // namespace

MCEstimate run_trials(const MCConfig& cfg, std::uint64_t tag,
                      const std::function<double(SplitMix64&)>& trial) {
  if (cfg.trials == 0) throw domain_error("Monte Carlo needs at least one trial");
  const std::size_t chunks = (cfg.trials + kChunk - 1) / kChunk;
  std::vector<Moments> parts(chunks);
  parallel_for(chunks, cfg.workers, [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(cfg.trials, lo + kChunk);
    Moments m;
    for (std::size_t i = lo; i < hi; ++i) {
      SplitMix64 rng = derive_stream(cfg.seed, {tag, i});
      m.add(trial(rng));
    }
    parts[ci] = m;
  });
  Moments all;
  for (const auto& p : parts) all.merge(p);
  MCEstimate est;
  est.trials = cfg.trials;
  est.mean = all.mean;
  const double variance = all.n > 1.0 ? all.m2 / (all.n - 1.0) : 0.0;
  est.std_error = std::sqrt(variance / all.n);
  return est;
}

MCEstimate mc_deletion_rate_fedsgt(std::uint64_t L, std::uint64_t B, const MCConfig& cfg) {
  if (L == 0 || B == 0) throw domain_error("mc_deletion_rate_fedsgt: L and B must be >= 1");
  const std::uint64_t heads = std::min(L, B);
  return run_trials(cfg, tag_of(kDeletionSgt, L, B), [L, heads](SplitMix64& rng) {
    // Rotation t starts with group (L - t) mod L: heads are 0, L-1, ..., L-heads+1.
    std::vector<bool> hit(L, false);
    std::uint64_t remaining = heads;
    std::uint64_t count = 0;
    while (remaining > 0) {
      const std::uint64_t g = rng.bounded(L);
      ++count;
      const bool is_head = g == 0 || g >= L - heads + 1;
      if (is_head && !hit[g]) {
        hit[g] = true;
        --remaining;
      }
    }
    return static_cast<double>(count);
  });
}

MCEstimate mc_deletion_rate_fedsgt_finite(std::uint64_t L, std::uint64_t B,
                                          std::uint64_t units_per_group, const MCConfig& cfg) {
  if (L == 0 || B == 0 || units_per_group == 0) {
    throw domain_error("mc_deletion_rate_fedsgt_finite: arguments must be >= 1");
  }
  const std::uint64_t heads = std::min(L, B);
  return run_trials(cfg, tag_of(kDeletionSgtFinite, L, B, units_per_group),
                    [L, heads, units_per_group](SplitMix64& rng) {
                      const std::uint64_t pool = L * units_per_group;
                      std::vector<std::uint64_t> units(pool);
                      std::iota(units.begin(), units.end(), std::uint64_t{0});
                      std::vector<bool> hit(L, false);
                      std::uint64_t remaining = heads;
                      std::uint64_t count = 0;
                      for (std::uint64_t i = 0; i < pool && remaining > 0; ++i) {
                        const std::uint64_t j = i + rng.bounded(pool - i);
                        std::swap(units[i], units[j]);
                        const std::uint64_t g = units[i] / units_per_group;
                        ++count;
                        const bool is_head = g == 0 || g >= L - heads + 1;
                        if (is_head && !hit[g]) {
                          hit[g] = true;
                          --remaining;
                        }
                      }
                      return static_cast<double>(count);
                    });
}

MCEstimate mc_deletion_rate_fedcio(std::uint64_t c, const MCConfig& cfg) {
  if (c == 0) throw domain_error("mc_deletion_rate_fedcio: c must be >= 1");
  return run_trials(cfg, tag_of(kDeletionCio, c), [c](SplitMix64& rng) {
    std::vector<bool> hit(c, false);
    std::uint64_t remaining = c;
    std::uint64_t count = 0;
    while (remaining > 0) {
      const std::uint64_t k = rng.bounded(c);
      ++count;
      if (!hit[k]) {
        hit[k] = true;
        --remaining;
      }
    }
    return static_cast<double>(count);
  });
}

MCEstimate mc_expected_span(std::uint64_t L, std::uint64_t r, const MCConfig& cfg) {
  if (L == 0) throw domain_error("mc_expected_span: L must be >= 1");
  return run_trials(cfg, tag_of(kSpan, L, r), [L, r](SplitMix64& rng) {
    std::vector<GroupId> hits;
    return static_cast<double>(span_of_hits(L, r, rng, hits));
  });
}

MCEstimate mc_expected_remaining(analytics::Method method, std::uint64_t D, std::uint64_t units,
                                 std::uint64_t r, const MCConfig& cfg) {
  if (units == 0) throw domain_error("mc_expected_remaining: group/cluster count must be >= 1");
  const double share = static_cast<double>(D) / static_cast<double>(units);
  switch (method) {
    case analytics::Method::FedSGT:
      return run_trials(cfg, tag_of(kRemainingSgt, D, units, r), [=](SplitMix64& rng) {
        std::vector<GroupId> hits;
        const auto span = span_of_hits(units, r, rng, hits);
        return share * static_cast<double>(units - span);
      });
    case analytics::Method::FedCIO:
      return run_trials(cfg, tag_of(kRemainingCio, D, units, r), [=](SplitMix64& rng) {
        std::vector<bool> hit(units, false);
        for (std::uint64_t i = 0; i < r; ++i) hit[rng.bounded(units)] = true;
        const auto unhit = std::count(hit.begin(), hit.end(), false);
        return share * static_cast<double>(unhit);
      });
    case analytics::Method::FedAvg:
      break;
  }
  throw domain_error("mc_expected_remaining: unsupported method");
}

MCEstimate mc_comm_cost(std::uint64_t L, std::uint64_t S, const MCConfig& cfg) {
  if (L == 0 || S == 0) throw domain_error("mc_comm_cost: L and S must be >= 1");
  return run_trials(cfg, tag_of(kComm, L, S), [L, S](SplitMix64& rng) {
    std::vector<bool> member(L, false);
    for (std::uint64_t i = 0; i < S; ++i) member[rng.bounded(L)] = true;
    std::uint64_t total = 0;
    for (std::uint64_t t = 0; t < L; ++t) {
      // Rotation t places group g at 0-based position (g + t) mod L.
      std::uint64_t first = L;
      for (std::uint64_t g = 0; g < L; ++g) {
        if (member[g]) first = std::min(first, (g + t) % L);
      }
      total += L - (first + 1) + 1;
    }
    return static_cast<double>(total);
  });
}

MCEstimate mc_client_groups(std::uint64_t L, std::uint64_t S, const MCConfig& cfg) {
  return run_trials(cfg, tag_of(kClientGroups, L, S), [L, S](SplitMix64& rng) {
    std::vector<bool> member(L, false);
    for (std::uint64_t i = 0; i < S; ++i) member[rng.bounded(L)] = true;
    return static_cast<double>(std::count(member.begin(), member.end(), true));
  });
}

double zscore(double closed_form, const MCEstimate& mc, double value_range) {
  const double diff = mc.mean - closed_form;
  if (mc.std_error > 0.0) return diff / mc.std_error;
  // Every trial returned the same value, so the sample carries no spread.
  // The mean still cannot resolve anything finer than one deviating trial.
  if (value_range > 0.0 && mc.trials > 0) {
    return diff / (value_range / static_cast<double>(mc.trials));
  }
  if (std::abs(diff) <= 1e-9 * std::max(1.0, std::abs(closed_form))) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

std::vector<ValidationRow> run_validation(const ValidationGrid& grid, const MCConfig& cfg,
                                          const ClosedFormFilter& filter) {
  std::vector<ValidationRow> rows;
  auto add = [&](std::string quantity, std::string params, double closed, MCEstimate mc,
                 double value_range = 0.0) {
    if (filter) closed = filter(quantity, closed);
    ValidationRow row{std::move(quantity), std::move(params), closed, mc,
                      zscore(closed, mc, value_range), true};
    row.pass = std::abs(row.zscore) <= cfg.confidence_k;
    rows.push_back(std::move(row));
  };
  auto kv = [](const char* k, std::uint64_t v) { return std::string(k) + "=" + std::to_string(v); };

  for (auto L : grid.L) {
    std::vector<std::uint64_t> budgets;
    for (auto b : grid.B) {
      const std::uint64_t B = b == 0 ? L : b;
      if (std::find(budgets.begin(), budgets.end(), B) == budgets.end()) budgets.push_back(B);
    }
    for (auto B : budgets) {
      add("deletion_rate_fedsgt", kv("L", L) + " " + kv("B", B),
          analytics::deletion_rate_fedsgt(L, B), mc_deletion_rate_fedsgt(L, B, cfg));
    }
  }
  for (auto c : grid.c) {
    add("deletion_rate_fedcio", kv("c", c), analytics::deletion_rate_fedcio(c),
        mc_deletion_rate_fedcio(c, cfg));
  }
  for (auto L : grid.L) {
    for (auto r : grid.r) {
      add("expected_span", kv("L", L) + " " + kv("r", r), analytics::expected_span(L, r),
          mc_expected_span(L, r, cfg), static_cast<double>(L));
    }
  }
  for (auto L : grid.L) {
    for (auto r : grid.r) {
      add("expected_remaining_fedsgt", kv("D", grid.D) + " " + kv("L", L) + " " + kv("r", r),
          analytics::expected_remaining_fedsgt(grid.D, L, r),
          mc_expected_remaining(analytics::Method::FedSGT, grid.D, L, r, cfg),
          static_cast<double>(grid.D));
    }
  }
  for (auto c : grid.c) {
    for (auto r : grid.r) {
      add("expected_remaining_fedcio", kv("D", grid.D) + " " + kv("c", c) + " " + kv("r", r),
          analytics::expected_remaining_fedcio(grid.D, c, r),
          mc_expected_remaining(analytics::Method::FedCIO, grid.D, c, r, cfg),
          static_cast<double>(grid.D));
    }
  }
  for (auto L : grid.L) {
    for (auto S : grid.S) {
      add("expected_comm_cost", kv("L", L) + " " + kv("S", S), analytics::expected_comm_cost(L, S),
          mc_comm_cost(L, S, cfg), static_cast<double>(L * L));
    }
  }
  return rows;
}

}  // namespace fedsgt::montecarlo
