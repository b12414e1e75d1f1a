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

#ifndef FEDSGT_GROUPING_HPP
#define FEDSGT_GROUPING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsgt/core_types.hpp"

namespace fedsgt {

struct SliceInfo {
  SliceRef ref;
  std::uint64_t samples = 0;
};

/// Balanced, index-driven assignment of client slices to L groups.
///
/// Construction sorts the catalog by (client, slice), applies a SplitMix64
/// Fisher-Yates shuffle seeded with `seed`, then cuts the shuffled list into
/// L contiguous runs. The first M mod L groups receive one extra slice.
class GroupingPlan {
 public:
  GroupingPlan() = default;

  std::size_t group_count() const { return groups_.size(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::vector<SliceRef>>& groups() const { return groups_; }
  const std::vector<SliceRef>& group(GroupId g) const { return groups_.at(g.get()); }
  std::size_t slice_count() const { return assignment_.size(); }

  /// Throws a lookup error for slices not in the plan.
  GroupId group_of(const SliceRef& slice) const;
  bool contains(const SliceRef& slice) const { return assignment_.count(slice) != 0; }
  std::uint64_t samples_of(const SliceRef& slice) const;
  std::uint64_t group_samples(GroupId g) const;

  /// Structured-text (JSON) document; byte-identical for identical plans.
  std::string to_json() const;
  static GroupingPlan from_json(const std::string& text);

  friend GroupingPlan build_grouping(std::vector<SliceInfo> catalog, std::size_t L,
                                     std::uint64_t seed);
  friend bool operator==(const GroupingPlan&, const GroupingPlan&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::vector<std::vector<SliceRef>> groups_;
  std::map<SliceRef, GroupId> assignment_;
  std::map<SliceRef, std::uint64_t> sizes_;
};

/// Throws a config error when the catalog has fewer slices than groups or
/// contains duplicates.
GroupingPlan build_grouping(std::vector<SliceInfo> catalog, std::size_t L, std::uint64_t seed);

}  // namespace fedsgt

#endif  // FEDSGT_GROUPING_HPP
