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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "fedsgt/analytics.hpp"
#include "fedsgt/dataset.hpp"
#include "fedsgt/grouping.hpp"

using namespace fedsgt;

namespace {

std::vector<SliceInfo> catalog(std::size_t clients, std::size_t slices, std::uint64_t samples = 10) {
  std::vector<SliceInfo> out;
  for (std::size_t c = 0; c < clients; ++c) {
    for (std::size_t s = 0; s < slices; ++s) out.push_back({{ClientId(c), SliceIdx(s)}, samples});
  }
  return out;
}

bool same_data(const Dataset& a, const Dataset& b) {
  if (a.client_count() != b.client_count() || a.test.features != b.test.features ||
      a.test.labels != b.test.labels) {
    return false;
  }
  for (std::size_t c = 0; c < a.client_count(); ++c) {
    const auto& x = a.clients[c].slices;
    const auto& y = b.clients[c].slices;
    if (x.size() != y.size()) return false;
    for (std::size_t s = 0; s < x.size(); ++s) {
      if (x[s].features != y[s].features || x[s].labels != y[s].labels) return false;
    }
  }
  return true;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fedsgt_test_" + name)).string();
}

}  // namespace

TEST_CASE("balanced groups") {
  const GroupingPlan twelve = build_grouping(catalog(4, 3), 6, 5);
  REQUIRE(twelve.group_count() == 6);
  for (const auto& g : twelve.groups()) CHECK(g.size() == 2);

  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const GroupingPlan five = build_grouping(catalog(5, 1), 5, seed);
    for (const auto& g : five.groups()) CHECK(g.size() == 1);
  }

  const GroupingPlan uneven = build_grouping(catalog(7, 2), 4, 3);
  std::size_t lo = 100, hi = 0;
  for (const auto& g : uneven.groups()) {
    lo = std::min(lo, g.size());
    hi = std::max(hi, g.size());
  }
  CHECK(hi - lo <= 1);
  CHECK(uneven.groups()[0].size() == 4);  // 14 = 4 + 4 + 3 + 3
  CHECK(uneven.groups()[3].size() == 3);
}

TEST_CASE("grouping is a partition and group_of agrees with the lists") {
  const auto cat = catalog(6, 5);
  const GroupingPlan plan = build_grouping(cat, 7, 21);
  std::set<SliceRef> seen;
  for (std::size_t g = 0; g < plan.group_count(); ++g) {
    CHECK_FALSE(plan.group(GroupId(g)).empty());
    for (const SliceRef& s : plan.group(GroupId(g))) {
      CHECK(seen.insert(s).second);
      CHECK(plan.group_of(s) == GroupId(g));
    }
  }
  CHECK(seen.size() == cat.size());
  CHECK(plan.slice_count() == cat.size());
  CHECK_THROWS_AS(plan.group_of({ClientId(99), SliceIdx(0)}), Error);
  CHECK_FALSE(plan.contains({ClientId(0), SliceIdx(9)}));
}

TEST_CASE("grouping is deterministic in its seed") {
  const auto cat = catalog(10, 5);
  const GroupingPlan a = build_grouping(cat, 10, 17);
  auto shuffled = cat;
  std::reverse(shuffled.begin(), shuffled.end());
  const GroupingPlan b = build_grouping(shuffled, 10, 17);
  CHECK(a == b);
  CHECK(a.to_json() == b.to_json());
  CHECK(build_grouping(cat, 10, 18).groups() != a.groups());
  CHECK(GroupingPlan::from_json(a.to_json()) == a);
}

TEST_CASE("grouping rejects bad catalogs") {
  CHECK_THROWS_AS(build_grouping(catalog(1, 3), 4, 0), Error);
  auto dup = catalog(2, 2);
  dup.push_back(dup.front());
  CHECK_THROWS_AS(build_grouping(dup, 2, 0), Error);
  CHECK_THROWS_AS(GroupingPlan::from_json("[]"), Error);
}

TEST_CASE("sample bookkeeping") {
  auto cat = catalog(2, 2);
  cat[1].samples = 30;
  const GroupingPlan plan = build_grouping(cat, 2, 4);
  CHECK(plan.samples_of(cat[1].ref) == 30);
  std::uint64_t total = 0;
  for (std::size_t g = 0; g < 2; ++g) total += plan.group_samples(GroupId(g));
  CHECK(total == 60);
}

TEST_CASE("groups per client track the independent-assignment model") {
  // The balanced shuffle draws without replacement, so agreement is loose;
  // the mean number of distinct groups per client must still be close.
  const std::size_t N = 10, S = 5, L = 10;
  double mean = 0.0;
  std::size_t samples = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const GroupingPlan plan = build_grouping(catalog(N, S), L, seed);
    for (std::size_t c = 0; c < N; ++c) {
      std::set<std::size_t> gs;
      for (std::size_t s = 0; s < S; ++s) gs.insert(plan.group_of({ClientId(c), SliceIdx(s)}).get());
      CHECK(gs.size() <= std::min(S, L));
      mean += static_cast<double>(gs.size());
      ++samples;
    }
  }
  mean /= static_cast<double>(samples);
  double expected = 0.0;
  for (std::uint64_t k = 1; k <= S; ++k) {
    expected += static_cast<double>(k) * combinatorics::to_double(analytics::prob_k_groups(L, S, k));
  }
  CHECK(mean == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("synthetic data") {
  SynthSpec spec;
  spec.clients = 6;
  spec.samples_per_client = 100;
  spec.slices_per_client = 4;
  spec.seed = 3;
  const Dataset a = synth_dataset(spec);
  const Dataset b = synth_dataset(spec);
  CHECK(same_data(a, b));
  CHECK(a.train_size() == 600);
  CHECK(a.catalog().size() == 24);
  CHECK(a.test.size() == spec.test_samples);

  SynthSpec other = spec;
  other.seed = 4;
  CHECK_FALSE(same_data(synth_dataset(other), a));

  // IID: every label appears at a reasonable rate on each client.
  for (const auto& c : a.clients) {
    std::vector<int> hist(spec.label_count, 0);
    std::size_t n = 0;
    for (const auto& s : c.slices) {
      for (int y : s.labels) ++hist[static_cast<std::size_t>(y)];
      n += s.size();
    }
    for (int h : hist) CHECK(static_cast<double>(h) / n < 0.45);
  }
}

TEST_CASE("Dirichlet labels are skewed") {
  // Reference: how often a Dirichlet(0.3) draw over 10 labels puts more than
  // half its mass on one label, estimated with the standard library.
  std::mt19937_64 gen(12345);
  std::gamma_distribution<double> gamma(0.3, 1.0);
  const int draws = 100000;
  int over = 0;
  for (int i = 0; i < draws; ++i) {
    double v[10], sum = 0.0;
    for (double& x : v) sum += (x = gamma(gen));
    if (*std::max_element(v, v + 10) > 0.5 * sum) ++over;
  }
  const double reference = static_cast<double>(over) / draws;

  SynthSpec spec;
  spec.label_count = 10;
  spec.alpha = 0.3;
  std::size_t skewed = 0, total = 0, iid_skewed = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    spec.seed = seed;
    for (bool non_iid : {true, false}) {
      SynthSpec s = spec;
      if (!non_iid) s.alpha.reset();
      const Dataset d = synth_dataset(s);
      for (const auto& c : d.clients) {
        std::vector<int> hist(10, 0);
        std::size_t n = 0;
        for (const auto& sl : c.slices) {
          for (int y : sl.labels) ++hist[static_cast<std::size_t>(y)];
          n += sl.size();
        }
        const bool over_half = *std::max_element(hist.begin(), hist.end()) * 2 > static_cast<int>(n);
        if (non_iid) {
          skewed += over_half;
          ++total;
        } else {
          iid_skewed += over_half;
        }
      }
    }
  }
  const double observed = static_cast<double>(skewed) / static_cast<double>(total);
  const double se = std::sqrt(reference * (1 - reference) / static_cast<double>(total));
  CHECK(std::abs(observed - reference) <= 4 * se + 0.01);
  CHECK(iid_skewed == 0);
}

TEST_CASE("local data follows the group mask in slice order") {
  SynthSpec spec;
  spec.clients = 3;
  spec.samples_per_client = 30;
  spec.slices_per_client = 3;
  const Dataset d = synth_dataset(spec);
  const GroupingPlan plan = build_grouping(d.catalog(), 3, 8);
  std::vector<bool> none(3, false), all(3, true);
  CHECK(d.local_data(ClientId(0), plan, none).empty());
  CHECK(d.local_data(ClientId(0), plan, all).size() == 30);
  CHECK(d.client_data(ClientId(1)).size() == 30);
}

TEST_CASE("csv datasets") {
  const std::string data = temp_path("data.csv");
  const std::string manifest = temp_path("manifest.csv");
  {
    std::ofstream f(data);
    f << "label,f0,f1\n1,0.5,1.5\n0,-1,2\n1,3,4\n0,0,0\n";
    std::ofstream m(manifest);
    m << "client,slice,split\n0,0,train\n0,1,train\n1,0,train\n0,0,test\n";
  }
  const Dataset d = load_csv_dataset(data, manifest);
  CHECK(d.feature_dim == 2);
  CHECK(d.label_count == 2);
  CHECK(d.client_count() == 2);
  CHECK(d.train_size() == 3);
  CHECK(d.test.size() == 1);
  CHECK(d.slice({ClientId(0), SliceIdx(1)}).features(0, 1) == 2.0);

  CHECK_THROWS_AS(load_csv_dataset(temp_path("missing.csv"), manifest), Error);
  {
    std::ofstream f(data);
    f << "y,f0\n1,0\n";
  }
  CHECK_THROWS_AS(load_csv_dataset(data, manifest), Error);
  {
    std::ofstream f(data);
    f << "label,f0\n1,abc\n";
  }
  CHECK_THROWS_AS(load_csv_dataset(data, manifest), Error);
  std::filesystem::remove(data);
  std::filesystem::remove(manifest);
}
