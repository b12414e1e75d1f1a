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

#include "fedsgt/sequencing.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "fedsgt/rng.hpp"

namespace fedsgt {

using json = nlohmann::ordered_json;

SequenceSet::SequenceSet(std::size_t L, std::vector<Permutation> perms, std::uint64_t seed)
    : L_(L), perms_(std::move(perms)), seed_(seed) {
  for (const auto& p : perms_) {
    if (p.size() != L_) throw config_error("sequence length differs from L");
    std::vector<bool> seen(L_, false);
    for (GroupId g : p) {
      if (g.get() >= L_ || seen[g.get()]) throw config_error("sequence is not a permutation");
      seen[g.get()] = true;
    }
  }
}

SequenceSet build_sequences(std::size_t L, std::size_t B, std::uint64_t seed) {
  if (L == 0 || B == 0) throw config_error("sequences: L and B must be >= 1");
  if (L <= 20) {
    std::uint64_t perms_available = 1;
    for (std::uint64_t i = 2; i <= L; ++i) perms_available *= i;
    if (B > perms_available) throw config_error("sequences: B exceeds L! distinct orders");
  }

  std::vector<Permutation> perms;
  std::set<std::vector<std::uint32_t>> seen;
  const std::size_t rotations = std::min(L, B);
  for (std::size_t t = 0; t < rotations; ++t) {
    Permutation p(L);
    std::vector<std::uint32_t> key(L);
    for (std::size_t pos = 0; pos < L; ++pos) {
      const auto g = static_cast<std::uint32_t>((pos + L - t) % L);
      p[pos] = GroupId(g);
      key[pos] = g;
    }
    seen.insert(key);
    perms.push_back(std::move(p));
  }

  SplitMix64 rng = derive_stream(seed, {0x5E9u});
  while (perms.size() < B) {
    std::vector<std::uint32_t> key(L);
    std::iota(key.begin(), key.end(), 0u);
    rng.shuffle(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    Permutation p;
    for (auto g : key) p.push_back(GroupId(g));
    perms.push_back(std::move(p));
  }
  return SequenceSet(L, std::move(perms), seed);
}

std::size_t SequenceState::surviving() const {
  return static_cast<std::size_t>(
      std::count_if(active_len.begin(), active_len.end(), [](std::size_t n) { return n > 0; }));
}

std::vector<GroupId> SequenceState::deleted_groups() const {
  std::vector<GroupId> out;
  for (std::size_t g = 0; g < deleted.size(); ++g) {
    if (deleted[g]) out.emplace_back(g);
  }
  return out;
}

std::string SequenceState::to_json() const {
  json doc;
  doc["format"] = "fedsgt-state";
  doc["version"] = 1;
  json groups = json::array();
  for (GroupId g : deleted_groups()) groups.push_back(g.value);
  doc["L"] = deleted.size();
  doc["deleted_groups"] = std::move(groups);
  doc["active_len"] = active_len;
  return doc.dump(1) + "\n";
}

SequenceState SequenceState::from_json(const std::string& text) {
  SequenceState state;
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "fedsgt-state") throw corrupt_error("not a sequence-state document");
    state.deleted.assign(doc.at("L").get<std::size_t>(), false);
    for (const auto& g : doc.at("deleted_groups")) {
      const auto idx = g.get<std::size_t>();
      if (idx >= state.deleted.size()) throw corrupt_error("state: group out of range");
      state.deleted[idx] = true;
    }
    state.active_len = doc.at("active_len").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw corrupt_error(std::string("state: ") + e.what());
  }
  return state;
}

namespace {

std::size_t active_prefix(const Permutation& perm, const std::vector<bool>& deleted) {
  std::size_t n = 0;
  while (n < perm.size() && !deleted[perm[n].get()]) ++n;
  return n;
}

}  // namespace

SequenceState initial_state(const SequenceSet& seqs) {
  SequenceState state;
  state.deleted.assign(seqs.group_count(), false);
  state.active_len.assign(seqs.size(), seqs.group_count());
  return state;
}

SequenceState apply_deletion(SequenceState state, const SequenceSet& seqs, GroupId group) {
  if (group.get() >= seqs.group_count()) {
    throw domain_error("apply_deletion: group " + std::to_string(group.value) + " outside [0, " +
                       std::to_string(seqs.group_count()) + ")");
  }
  state.deleted[group.get()] = true;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    state.active_len[s] = active_prefix(seqs.perms()[s], state.deleted);
  }
  return state;
}

std::optional<SequenceId> select_longseq(const SequenceState& state, const SequenceSet& seqs) {
  std::optional<SequenceId> best;
  std::size_t best_len = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    if (state.active_len[s] > best_len) {
      best_len = state.active_len[s];
      best = SequenceId(s);
    }
  }
  return best;
}

std::vector<SequenceId> select_minseq(const SequenceState& state, const SequenceSet& seqs) {
  const std::size_t L = seqs.group_count();
  std::vector<std::size_t> alive;
  std::vector<std::vector<bool>> prefix_sets;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    if (state.active_len[s] == 0) continue;
    std::vector<bool> members(L, false);
    for (std::size_t p = 0; p < state.active_len[s]; ++p) members[seqs.perms()[s][p].get()] = true;
    alive.push_back(s);
    prefix_sets.push_back(std::move(members));
  }

  auto subset = [L](const std::vector<bool>& a, const std::vector<bool>& b) {
    for (std::size_t g = 0; g < L; ++g) {
      if (a[g] && !b[g]) return false;
    }
    return true;
  };

  std::vector<SequenceId> out;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < alive.size() && !dominated; ++j) {
      if (i == j || !subset(prefix_sets[i], prefix_sets[j])) continue;
      // Strict superset elsewhere, or an identical set at a lower index.
      dominated = prefix_sets[i] != prefix_sets[j] || j < i;
    }
    if (!dominated) out.emplace_back(alive[i]);
  }
  return out;
}

std::vector<std::pair<SequenceId, double>> select_allseq(const SequenceState& state,
                                                         const SequenceSet& seqs) {
  std::size_t total = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) total += state.active_len[s];
  std::vector<std::pair<SequenceId, double>> out;
  if (total == 0) return out;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    if (state.active_len[s] == 0) continue;
    out.emplace_back(SequenceId(s),
                     static_cast<double>(state.active_len[s]) / static_cast<double>(total));
  }
  return out;
}

std::size_t cyclic_span(std::size_t L, const std::vector<GroupId>& deleted) {
  std::vector<std::size_t> points;
  for (GroupId g : deleted) {
    if (g.get() >= L) throw domain_error("cyclic_span: group outside [0, L)");
    points.push_back(g.get());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.empty()) return 0;
  std::size_t max_gap = points.front() + L - points.back();
  for (std::size_t i = 1; i < points.size(); ++i) {
    max_gap = std::max(max_gap, points[i] - points[i - 1]);
  }
  return L - max_gap + 1;
}

}  // namespace fedsgt
