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
#include <span>
#include <string>
#include <vector>

#include "adaptleak/registry.hpp"

namespace adaptleak {

/// Simulation minutes since start.
using Tick = std::int64_t;

inline constexpr Tick kTicksPerDay = 1440;

/// Setting levels indexed by the owning rule's action order.
using ActionVector = std::vector<int>;

struct AdaptationRecord {
  Tick t = 0;
  int rule = 0;
  std::string context;
  ActionVector actions;

  friend bool operator==(const AdaptationRecord&, const AdaptationRecord&) = default;
};

using RecordLog = std::vector<AdaptationRecord>;

/// Appends `rec`. Throws NonMonotoneTimestamp if rec.t precedes the last
/// record of the same rule, WrongActionSet if the vector does not match the
/// rule's action list.
void record_adaptation(RecordLog& log, AdaptationRecord rec, const Registry& reg);

/// Dense per-tick matrix of action levels (row-major, one row per tick).
struct ActionTimeline {
  std::vector<std::string> names;
  std::vector<int> levels;

  std::size_t width() const { return names.size(); }
  Tick horizon() const {
    return names.empty() ? 0 : static_cast<Tick>(levels.size() / names.size());
  }
  std::span<const int> row(Tick t) const {
    return {levels.data() + static_cast<std::size_t>(t) * width(), width()};
  }
  std::span<int> row(Tick t) {
    return {levels.data() + static_cast<std::size_t>(t) * width(), width()};
  }
  int at(Tick t, std::size_t action) const {
    return levels[static_cast<std::size_t>(t) * width() + action];
  }
  int column_of(std::string_view name) const;

  friend bool operator==(const ActionTimeline&, const ActionTimeline&) = default;
};

/// Ground truth for one rule: per-tick context symbol and last-value-hold
/// action levels.
struct TickSeries {
  int rule = 0;
  std::vector<std::string> alphabet;
  std::vector<int> context;  // index into alphabet, one per tick
  ActionTimeline actions;

  Tick horizon() const { return static_cast<Tick>(context.size()); }
  const std::string& context_at(Tick t) const { return alphabet[context[t]]; }

  /// Index of `symbol` in the alphabet, appending it if new.
  int intern(const std::string& symbol);
};

/// Same per-tick symbols and levels, regardless of alphabet order.
bool same_timeline(const TickSeries& a, const TickSeries& b);

struct TickState {
  std::string context;
  ActionVector actions;
};

/// Last-value-hold expansion of the records of `rule` into `horizon` ticks.
/// Ticks before the first record carry `initial`. When `alphabet` is empty it
/// is discovered in order of appearance, starting with the initial context.
TickSeries tick_expand(const RecordLog& log, Tick horizon, const TickState& initial,
                       const AdaptationRule& rule, std::vector<std::string> alphabet = {});

/// Records at every tick where the context or the action vector changes.
/// tick_expand of the result (with the series' tick 0 state as initial)
/// reproduces the series.
RecordLog change_points(const TickSeries& series);

/// Ticks [from, to) of a series or timeline.
TickSeries slice(const TickSeries& series, Tick from, Tick to);
ActionTimeline slice(const ActionTimeline& timeline, Tick from, Tick to);

/// Keeps only the named columns, in the given order.
ActionTimeline project(const ActionTimeline& timeline, const std::vector<std::string>& names);

}  // namespace adaptleak
