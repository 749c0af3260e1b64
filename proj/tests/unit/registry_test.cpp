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

#include "adaptleak/registry.hpp"

#include <set>
#include <string>

#include "adaptleak/error.hpp"
#include "gtest/gtest.h"

namespace adaptleak {
namespace {

// Location drives the ringer, the second rule drives the camera from three
// sources.
constexpr char kTwoRules[] = R"(<registry>
  <adaptation>
    <context><method>GPS</method></context>
    <action><method>RingerMode</method><method>AlarmVolume</method></action>
  </adaptation>
  <adaptation>
    <context>
      <method>Battery</method>
      <method>GPS</method>
      <method>Transportation</method>
    </context>
    <action>
      <method>CameraResolution</method>
      <method>CameraFlash</method>
      <method>CameraFocus</method>
    </action>
  </adaptation>
</registry>)";

ErrorCode parse_error(const std::string& text) {
  try {
    parse_registry(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse accepted:\n" << text;
  return ErrorCode::kConfigError;
}

Registry synthetic(int rules, int actions_per_rule) {
  Registry reg;
  for (int r = 0; r < rules; ++r) {
    AdaptationRule rule;
    rule.id = r;
    rule.contexts = {"Ctx" + std::to_string(r)};
    for (int a = 0; a < actions_per_rule; ++a) rule.actions.push_back("R" + std::to_string(r) + "A" + std::to_string(a));
    reg.rules.push_back(rule);
  }
  return reg;
}

TEST(ParseRegistryTest, TwoRuleSnippet) {
  const Registry reg = parse_registry(kTwoRules);
  ASSERT_EQ(reg.rules.size(), 2u);
  EXPECT_EQ(reg.rules[0].id, 0);
  EXPECT_EQ(reg.rules[0].contexts, (std::vector<std::string>{"GPS"}));
  EXPECT_EQ(reg.rules[0].actions, (std::vector<std::string>{"RingerMode", "AlarmVolume"}));
  EXPECT_EQ(reg.rules[1].contexts.size(), 3u);
  EXPECT_EQ(reg.rules[1].actions.size(), 3u);
  EXPECT_EQ(reg.owner_of("CameraFlash"), 1);
  EXPECT_EQ(reg.owner_of("Brightness"), -1);
}

TEST(ParseRegistryTest, MinimalDocument) {
  const Registry reg = parse_registry(
      "<registry><adaptation id=\"0\"><context><method>A</method></context>"
      "<action><method>B</method></action></adaptation></registry>");
  ASSERT_EQ(reg.rules.size(), 1u);
  EXPECT_EQ(reg.rules[0].actions, (std::vector<std::string>{"B"}));
}

TEST(ParseRegistryTest, DuplicateActionAcrossRules) {
  EXPECT_EQ(parse_error("<registry>"
                        "<adaptation><context><method>GPS</method></context><action><method>RingerMode</method></action></adaptation>"
                        "<adaptation><context><method>Wifi</method></context><action><method>RingerMode</method></action></adaptation>"
                        "</registry>"),
            ErrorCode::kDuplicateActionAcrossRules);
}

TEST(ParseRegistryTest, RejectsMalformedInput) {
  EXPECT_EQ(parse_error(""), ErrorCode::kMalformedDocument);
  EXPECT_EQ(parse_error("<registry>"), ErrorCode::kMalformedDocument);
  EXPECT_EQ(parse_error("<registry><adaptation name=\"x\"><context><method>A</method></context>"
                        "<action><method>B</method></action></adaptation></registry>"),
            ErrorCode::kMalformedDocument);
  EXPECT_EQ(parse_error("<registry><adaptation><context><method>9A</method></context>"
                        "<action><method>B</method></action></adaptation></registry>"),
            ErrorCode::kMalformedDocument);
  EXPECT_EQ(parse_error("<registry><adaptation><context></context>"
                        "<action><method>B</method></action></adaptation></registry>"),
            ErrorCode::kEmptyContextList);
  EXPECT_EQ(parse_error("<registry><adaptation><context><method>A</method></context>"
                        "<action></action></adaptation></registry>"),
            ErrorCode::kEmptyActionList);
  EXPECT_EQ(parse_error("<registry><adaptation><context><method>A</method></context>"
                        "<action><method>A</method></action></adaptation></registry>"),
            ErrorCode::kContextActionOverlap);
}

TEST(SerializeRegistryTest, RoundTripsSnippet) {
  const Registry reg = parse_registry(kTwoRules);
  const std::string text = serialize_registry(reg);
  EXPECT_EQ(parse_registry(text), reg);
  // Canonical form is a fixed point.
  EXPECT_EQ(serialize_registry(parse_registry(text)), text);
}

TEST(SerializeRegistryTest, OneRuleHasOneAdaptationElement) {
  const std::string text = serialize_registry(synthetic(1, 3));
  std::size_t count = 0;
  for (std::size_t pos = text.find("<adaptation"); pos != std::string::npos; pos = text.find("<adaptation", pos + 1)) {
    ++count;
  }
  EXPECT_EQ(count, 1u);
}

TEST(SerializeRegistryTest, RoundTripProperty) {
  for (int rules = 1; rules <= 4; ++rules) {
    for (int width = 1; width <= 5; ++width) {
      const Registry reg = synthetic(rules, width);
      EXPECT_EQ(parse_registry(serialize_registry(reg)), reg) << rules << "x" << width;
    }
  }
}

TEST(ProtectionListsTest, OneListPerRule) {
  const ProtectionLists lists = build_protection_lists(parse_registry(kTwoRules));
  ASSERT_EQ(lists.lists.size(), 2u);
  EXPECT_EQ(lists.for_rule(0), (std::vector<std::string>{"RingerMode", "AlarmVolume"}));
  EXPECT_EQ(lists.for_rule(1).size(), 3u);
  EXPECT_TRUE(lists.protects(1, "CameraFocus"));
  EXPECT_FALSE(lists.protects(0, "CameraFocus"));
}

TEST(ProtectionListsTest, PartitionsActions) {
  const Registry reg = synthetic(4, 3);
  const ProtectionLists lists = build_protection_lists(reg);
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& l : lists.lists) {
    total += l.size();
    seen.insert(l.begin(), l.end());
  }
  EXPECT_EQ(total, seen.size());
  EXPECT_EQ(total, 12u);
  EXPECT_EQ(build_protection_lists(synthetic(1, 1)).for_rule(0).size(), 1u);
}

TEST(InitMiTablesTest, RowCountIsPowerSetMinusEmpty) {
  for (int width = 1; width <= 12; ++width) {
    const MITables tables = init_mi_tables(synthetic(1, width));
    ASSERT_EQ(tables.size(), 1u);
    EXPECT_EQ(tables[0].row_count(), (std::size_t{1} << width) - 1);
    for (double v : tables[0].values) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(init_mi_tables(synthetic(1, 12))[0].row_count(), 4095u);
}

TEST(InitMiTablesTest, TooManyActions) {
  try {
    init_mi_tables(synthetic(1, 20), 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooManyActions);
  }
}

TEST(InitMiTablesTest, MaskToNamesIsSorted) {
  const std::vector<std::string> actions{"Wifi", "Alarm", "Ringer"};
  EXPECT_EQ(mask_to_names(actions, 0b101), (std::vector<std::string>{"Ringer", "Wifi"}));
}

}  // namespace
}  // namespace adaptleak
