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

#ifndef FEDSGT_SEQUENCING_HPP
#define FEDSGT_SEQUENCING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedsgt/core_types.hpp"

namespace fedsgt {

using Permutation = std::vector<GroupId>;

/// The B training orders. Sequence t < min(L, B) is the right-rotation of
/// the identity by t, so position p holds group (p - t) mod L; any further
/// sequences are distinct seeded random permutations.
class SequenceSet {
 public:
  SequenceSet() = default;
  SequenceSet(std::size_t L, std::vector<Permutation> perms, std::uint64_t seed);

  std::size_t group_count() const { return L_; }
  std::size_t size() const { return perms_.size(); }
  std::uint64_t seed() const { return seed_; }
  const Permutation& operator[](SequenceId s) const { return perms_.at(s.get()); }
  const std::vector<Permutation>& perms() const { return perms_; }
  /// Number of leading rotation sequences covered by the closed forms.
  std::size_t rotation_count() const { return L_ < perms_.size() ? L_ : perms_.size(); }

 private:
  std::size_t L_ = 0;
  std::vector<Permutation> perms_;
  std::uint64_t seed_ = 0;
};

SequenceSet build_sequences(std::size_t L, std::size_t B, std::uint64_t seed);

/// Deleted groups plus, per sequence, the length of the longest prefix that
/// avoids all of them.
struct SequenceState {
  std::vector<bool> deleted;
  std::vector<std::size_t> active_len;

  std::size_t surviving() const;
  std::vector<GroupId> deleted_groups() const;
  std::string to_json() const;
  static SequenceState from_json(const std::string& text);
  friend bool operator==(const SequenceState&, const SequenceState&) = default;
};

SequenceState initial_state(const SequenceSet& seqs);

/// Idempotent; throws a domain error for groups outside [0, L).
SequenceState apply_deletion(SequenceState state, const SequenceSet& seqs, GroupId group);

/// Longest active prefix, lowest index on ties; empty when every sequence is dead.
std::optional<SequenceId> select_longseq(const SequenceState& state, const SequenceSet& seqs);

/// Surviving sequences whose active-prefix group sets are maximal under
/// inclusion. Among identical prefix sets only the lowest index is kept.
std::vector<SequenceId> select_minseq(const SequenceState& state, const SequenceSet& seqs);

/// Every surviving sequence weighted by active_len / sum(active_len).
std::vector<std::pair<SequenceId, double>> select_allseq(const SequenceState& state,
                                                         const SequenceSet& seqs);

/// Fewest contiguous groups (cyclically) covering every deleted group:
/// L - (largest cyclic gap) + 1, and 0 for no deletions.
std::size_t cyclic_span(std::size_t L, const std::vector<GroupId>& deleted);

}  // namespace fedsgt

#endif  // FEDSGT_SEQUENCING_HPP
