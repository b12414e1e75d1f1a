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

#include "fedsgt/grouping.hpp"

#include <algorithm>

#include <json.hpp>

#include "fedsgt/rng.hpp"

namespace fedsgt {

using json = nlohmann::ordered_json;

GroupingPlan build_grouping(std::vector<SliceInfo> catalog, std::size_t L, std::uint64_t seed) {
  if (L == 0) throw config_error("grouping: L must be >= 1");
  if (catalog.size() < L) {
    throw config_error("grouping: " + std::to_string(catalog.size()) + " slices cannot fill " +
                       std::to_string(L) + " groups");
  }
  std::sort(catalog.begin(), catalog.end(),
            [](const SliceInfo& a, const SliceInfo& b) { return a.ref < b.ref; });
  for (std::size_t i = 1; i < catalog.size(); ++i) {
    if (catalog[i].ref == catalog[i - 1].ref) {
      throw config_error("grouping: duplicate slice (" + std::to_string(catalog[i].ref.client.value) +
                         "," + std::to_string(catalog[i].ref.slice.value) + ")");
    }
  }

  GroupingPlan plan;
  plan.seed_ = seed;
  for (const auto& s : catalog) plan.sizes_[s.ref] = s.samples;

  SplitMix64 rng(seed);
  rng.shuffle(catalog.begin(), catalog.end());

  const std::size_t M = catalog.size();
  const std::size_t base = M / L;
  const std::size_t extra = M % L;
  plan.groups_.resize(L);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < L; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i, ++pos) {
      plan.groups_[g].push_back(catalog[pos].ref);
      plan.assignment_[catalog[pos].ref] = GroupId(g);
    }
  }
  return plan;
}

GroupId GroupingPlan::group_of(const SliceRef& slice) const {
  auto it = assignment_.find(slice);
  if (it == assignment_.end()) {
    throw lookup_error("slice (" + std::to_string(slice.client.value) + "," +
                       std::to_string(slice.slice.value) + ") is not in the grouping plan");
  }
  return it->second;
}

std::uint64_t GroupingPlan::samples_of(const SliceRef& slice) const {
  auto it = sizes_.find(slice);
  if (it == sizes_.end()) throw lookup_error("slice is not in the grouping plan");
  return it->second;
}

std::uint64_t GroupingPlan::group_samples(GroupId g) const {
  std::uint64_t total = 0;
  for (const auto& s : group(g)) total += samples_of(s);
  return total;
}

std::string GroupingPlan::to_json() const {
  json doc;
  doc["format"] = "fedsgt-grouping";
  doc["version"] = 1;
  doc["prng"] = "splitmix64";
  doc["seed"] = seed_;
  doc["L"] = groups_.size();
  json groups = json::array();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    json members = json::array();
    for (const auto& s : groups_[g]) {
      members.push_back({{"client", s.client.value}, {"slice", s.slice.value},
                         {"samples", sizes_.at(s)}});
    }
    groups.push_back({{"group", g}, {"slices", std::move(members)}});
  }
  doc["groups"] = std::move(groups);
  return doc.dump(1) + "\n";
}

GroupingPlan GroupingPlan::from_json(const std::string& text) {
  GroupingPlan plan;
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "fedsgt-grouping") throw corrupt_error("not a grouping document");
    plan.seed_ = doc.at("seed").get<std::uint64_t>();
    const auto L = doc.at("L").get<std::size_t>();
    const auto& groups = doc.at("groups");
    if (groups.size() != L) throw corrupt_error("grouping: group count mismatch");
    plan.groups_.resize(L);
    for (std::size_t g = 0; g < L; ++g) {
      for (const auto& m : groups[g].at("slices")) {
        SliceRef ref{ClientId(m.at("client").get<std::uint32_t>()),
                     SliceIdx(m.at("slice").get<std::uint32_t>())};
        if (!plan.assignment_.emplace(ref, GroupId(g)).second) {
          throw corrupt_error("grouping: slice listed twice");
        }
        plan.sizes_[ref] = m.at("samples").get<std::uint64_t>();
        plan.groups_[g].push_back(ref);
      }
    }
  } catch (const json::exception& e) {
    throw corrupt_error(std::string("grouping: ") + e.what());
  }
  return plan;
}

}  // namespace fedsgt
