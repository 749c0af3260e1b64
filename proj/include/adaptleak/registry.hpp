// Copyright 2026 The AdaptLeak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adaptleak {

/// Returns true when `name` matches [A-Za-z][A-Za-z0-9_]*.
bool is_method_id(std::string_view name);

/// One context -> actions mapping (one <adaptation> element).
struct AdaptationRule {
  int id = 0;
  std::vector<std::string> contexts;
  std::vector<std::string> actions;

  /// Position of `action` in `actions`, or -1.
  int action_index(std::string_view action) const;

  friend bool operator==(const AdaptationRule&, const AdaptationRule&) = default;
};

/// Rules in document order. Ids are unique and cover 0..n-1; an action
/// method belongs to at most one rule.
struct Registry {
  std::vector<AdaptationRule> rules;

  const AdaptationRule& rule(int id) const;
  /// Id of the rule that owns `action`, or -1.
  int owner_of(std::string_view action) const;

  friend bool operator==(const Registry&, const Registry&) = default;
};

/// Throws Error with the registry error codes if any invariant is broken.
void validate(const Registry& reg);

Registry parse_registry(std::string_view text);
Registry load_registry(const std::string& path);

/// Canonical form: two-space indentation, explicit ids, trailing newline.
std::string serialize_registry(const Registry& reg);

/// Getters monitored for each rule, indexed by rule id.
struct ProtectionLists {
  std::vector<std::vector<std::string>> lists;

  const std::vector<std::string>& for_rule(int rule_id) const { return lists.at(rule_id); }
  bool protects(int rule_id, std::string_view action) const;
};

ProtectionLists build_protection_lists(const Registry& reg);

/// Bitmask over a rule's actions; bit i is actions[i].
using ActionMask = std::uint32_t;

inline constexpr int kDefaultMaxActionsPerRule = 16;

/// Normalized mutual information between the rule's context and every
/// non-empty subset of its actions. `values[mask]` holds the entry for the
/// subset `mask`; slot 0 (the empty set) is kept at zero and is not a row.
struct MITable {
  int rule_id = 0;
  std::vector<std::string> actions;
  std::vector<double> values;

  std::size_t row_count() const { return values.empty() ? 0 : values.size() - 1; }
  double at(ActionMask mask) const { return values.at(mask); }
  ActionMask full_mask() const { return static_cast<ActionMask>(values.size() - 1); }
};

using MITables = std::vector<MITable>;

/// One zero-filled table per rule with 2^|actions| - 1 rows.
MITables init_mi_tables(const Registry& reg, int max_actions_per_rule = kDefaultMaxActionsPerRule);

/// Sorted action names for a subset mask, used when dumping tables.
std::vector<std::string> mask_to_names(const std::vector<std::string>& actions, ActionMask mask);

}  // namespace adaptleak
