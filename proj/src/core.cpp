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

#include "adaptleak/core.hpp"

#include <algorithm>

#include "adaptleak/error.hpp"

namespace adaptleak {

void record_adaptation(RecordLog& log, AdaptationRecord rec, const Registry& reg) {
  const AdaptationRule& rule = reg.rule(rec.rule);
  if (rec.actions.size() != rule.actions.size()) {
    throw Error(ErrorCode::kWrongActionSet,
                "record for adaptation " + std::to_string(rec.rule) + " carries " +
                    std::to_string(rec.actions.size()) + " actions, expected " +
                    std::to_string(rule.actions.size()));
  }
  if (rec.t < 0) throw Error(ErrorCode::kNonMonotoneTimestamp, "negative timestamp");
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (it->rule != rec.rule) continue;
    if (rec.t < it->t) {
      throw Error(ErrorCode::kNonMonotoneTimestamp,
                  "t=" + std::to_string(rec.t) + " after t=" + std::to_string(it->t));
    }
    break;
  }
  log.push_back(std::move(rec));
}

int ActionTimeline::column_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int TickSeries::intern(const std::string& symbol) {
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i] == symbol) return static_cast<int>(i);
  }
  alphabet.push_back(symbol);
  return static_cast<int>(alphabet.size() - 1);
}

bool same_timeline(const TickSeries& a, const TickSeries& b) {
  if (a.horizon() != b.horizon() || a.actions != b.actions) return false;
  for (Tick t = 0; t < a.horizon(); ++t) {
    if (a.context_at(t) != b.context_at(t)) return false;
  }
  return true;
}

TickSeries tick_expand(const RecordLog& log, Tick horizon, const TickState& initial,
                       const AdaptationRule& rule, std::vector<std::string> alphabet) {
  if (initial.actions.size() != rule.actions.size()) {
    throw Error(ErrorCode::kWrongActionSet, "initial vector does not match the rule's actions");
  }
  TickSeries series;
  series.rule = rule.id;
  series.alphabet = std::move(alphabet);
  series.actions.names = rule.actions;
  series.context.resize(static_cast<std::size_t>(horizon));
  series.actions.levels.resize(static_cast<std::size_t>(horizon) * rule.actions.size());

  int ctx = series.intern(initial.context);
  ActionVector current = initial.actions;
  Tick cursor = 0;
  Tick last = -1;
  auto fill_until = [&](Tick end) {
    for (; cursor < end; ++cursor) {
      series.context[cursor] = ctx;
      std::copy(current.begin(), current.end(), series.actions.row(cursor).begin());
    }
  };
  for (const auto& rec : log) {
    if (rec.rule != rule.id) continue;
    if (rec.t >= horizon) {
      throw Error(ErrorCode::kRecordBeyondHorizon,
                  "record at t=" + std::to_string(rec.t) + " beyond horizon " + std::to_string(horizon));
    }
    if (rec.t < last) throw Error(ErrorCode::kNonMonotoneTimestamp, "records are not time-sorted");
    if (rec.actions.size() != rule.actions.size()) {
      throw Error(ErrorCode::kWrongActionSet, "record vector does not match the rule's actions");
    }
    last = rec.t;
    fill_until(rec.t);
    ctx = series.intern(rec.context);
    current = rec.actions;
  }
  fill_until(horizon);
  return series;
}

RecordLog change_points(const TickSeries& series) {
  RecordLog out;
  for (Tick t = 1; t < series.horizon(); ++t) {
    auto prev = series.actions.row(t - 1);
    auto cur = series.actions.row(t);
    if (series.context[t] != series.context[t - 1] || !std::equal(prev.begin(), prev.end(), cur.begin())) {
      out.push_back({t, series.rule, series.context_at(t), ActionVector(cur.begin(), cur.end())});
    }
  }
  return out;
}

TickSeries slice(const TickSeries& series, Tick from, Tick to) {
  if (from < 0 || to > series.horizon() || from > to) {
    throw Error(ErrorCode::kLengthMismatch, "slice outside series");
  }
  TickSeries out;
  out.rule = series.rule;
  out.alphabet = series.alphabet;
  out.context.assign(series.context.begin() + from, series.context.begin() + to);
  out.actions = slice(series.actions, from, to);
  return out;
}

ActionTimeline slice(const ActionTimeline& timeline, Tick from, Tick to) {
  if (from < 0 || to > timeline.horizon() || from > to) {
    throw Error(ErrorCode::kLengthMismatch, "slice outside timeline");
  }
  ActionTimeline out;
  out.names = timeline.names;
  const auto w = static_cast<std::ptrdiff_t>(timeline.width());
  out.levels.assign(timeline.levels.begin() + from * w, timeline.levels.begin() + to * w);
  return out;
}

ActionTimeline project(const ActionTimeline& timeline, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    int c = timeline.column_of(n);
    if (c < 0) throw Error(ErrorCode::kUnknownAction, "no column '" + n + "'");
    cols.push_back(static_cast<std::size_t>(c));
  }
  ActionTimeline out;
  out.names = names;
  out.levels.reserve(static_cast<std::size_t>(timeline.horizon()) * cols.size());
  for (Tick t = 0; t < timeline.horizon(); ++t) {
    for (auto c : cols) out.levels.push_back(timeline.at(t, c));
  }
  return out;
}

}  // namespace adaptleak
