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

#include <random>

#include "adaptleak/error.hpp"
#include "gtest/gtest.h"

namespace adaptleak {
namespace {

Registry one_rule() {
  Registry reg;
  reg.rules.push_back({0, {"Location"}, {"RingerMode", "Brightness"}});
  return reg;
}

ErrorCode append_error(RecordLog& log, AdaptationRecord rec, const Registry& reg) {
  try {
    record_adaptation(log, std::move(rec), reg);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "record accepted";
  return ErrorCode::kConfigError;
}

TEST(RecordAdaptationTest, AppendsInOrder) {
  const Registry reg = one_rule();
  RecordLog log;
  record_adaptation(log, {0, 0, "home", {1, 100}}, reg);
  EXPECT_EQ(log.size(), 1u);
  record_adaptation(log, {5, 0, "work", {0, 50}}, reg);
  EXPECT_EQ(append_error(log, {3, 0, "home", {1, 100}}, reg), ErrorCode::kNonMonotoneTimestamp);
  EXPECT_EQ(append_error(log, {9, 0, "home", {1}}, reg), ErrorCode::kWrongActionSet);
  EXPECT_EQ(log.size(), 2u);
}

TEST(TickExpandTest, SingleRecordFillsHorizon) {
  const Registry reg = one_rule();
  const TickSeries s = tick_expand({{0, 0, "home", {2, 7}}}, 10, {"home", {0, 0}}, reg.rules[0]);
  ASSERT_EQ(s.horizon(), 10);
  for (Tick t = 0; t < 10; ++t) {
    EXPECT_EQ(s.context_at(t), "home");
    EXPECT_EQ(s.actions.at(t, 0), 2);
    EXPECT_EQ(s.actions.at(t, 1), 7);
  }
}

TEST(TickExpandTest, HoldsUntilNextRecord) {
  const Registry reg = one_rule();
  const TickSeries s =
      tick_expand({{0, 0, "home", {2, 7}}, {5, 0, "work", {0, 9}}}, 10, {"home", {0, 0}}, reg.rules[0]);
  for (Tick t = 0; t < 10; ++t) {
    EXPECT_EQ(s.context_at(t), t < 5 ? "home" : "work") << t;
    EXPECT_EQ(s.actions.at(t, 1), t < 5 ? 7 : 9) << t;
  }
}

TEST(TickExpandTest, EmptyLogCarriesInitial) {
  const Registry reg = one_rule();
  const TickSeries s = tick_expand({}, 3, {"away", {4, 4}}, reg.rules[0]);
  ASSERT_EQ(s.horizon(), 3);
  for (Tick t = 0; t < 3; ++t) EXPECT_EQ(s.context_at(t), "away");
}

TEST(TickExpandTest, RecordBeyondHorizon) {
  const Registry reg = one_rule();
  try {
    tick_expand({{12, 0, "home", {1, 1}}}, 10, {"home", {0, 0}}, reg.rules[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRecordBeyondHorizon);
  }
}

// Random piecewise-constant series; re-expanding their change points must
// reproduce them exactly.
TEST(ChangePointsTest, ReExpansionIsIdentity) {
  const Registry reg = one_rule();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    TickSeries s;
    s.actions.names = reg.rules[0].actions;
    const Tick horizon = 1 + static_cast<Tick>(rng() % 300);
    int ctx = 0;
    std::vector<int> lv{0, 0};
    for (Tick t = 0; t < horizon; ++t) {
      if (rng() % 10 == 0) ctx = static_cast<int>(rng() % 3);
      if (rng() % 15 == 0) lv[rng() % 2] = static_cast<int>(rng() % 4);
      s.context.push_back(s.intern("c" + std::to_string(ctx)));
      s.actions.levels.insert(s.actions.levels.end(), lv.begin(), lv.end());
    }
    const RecordLog log = change_points(s);
    const TickState initial{s.context_at(0), {s.actions.at(0, 0), s.actions.at(0, 1)}};
    const TickSeries back = tick_expand(log, horizon, initial, reg.rules[0]);
    EXPECT_TRUE(same_timeline(back, s)) << "trial " << trial;
    // Change points of the re-expansion are the same records.
    EXPECT_EQ(change_points(back), log);
  }
}

TEST(SliceTest, ProjectKeepsNamedColumns) {
  ActionTimeline tl{{"A", "B", "C"}, {1, 2, 3, 4, 5, 6}};
  const ActionTimeline p = project(tl, {"C", "A"});
  EXPECT_EQ(p.levels, (std::vector<int>{3, 1, 6, 4}));
  const ActionTimeline s = slice(tl, 1, 2);
  EXPECT_EQ(s.levels, (std::vector<int>{4, 5, 6}));
}

}  // namespace
}  // namespace adaptleak
