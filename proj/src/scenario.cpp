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

#include "adaptleak/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "adaptleak/error.hpp"
#include "adaptleak/rng.hpp"

namespace adaptleak {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidScenario, msg); }

int index_of(const std::vector<std::string>& v, const std::string& s) {
  auto it = std::find(v.begin(), v.end(), s);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

std::size_t day_slot(DayType d) { return d == DayType::kWeekday ? 0 : 1; }

// Hour-by-hour index of the bucket in force; -1 where uncovered.
std::array<std::array<int, 24>, 2> bucket_table(const Scenario& sc) {
  std::array<std::array<int, 24>, 2> table{};
  for (auto& row : table) row.fill(-1);
  for (std::size_t i = 0; i < sc.schedule.size(); ++i) {
    const auto& b = sc.schedule[i];
    if (b.start_hour < 0 || b.end_hour > 24 || b.start_hour >= b.end_hour) {
      invalid("bucket hours must satisfy 0 <= start < end <= 24");
    }
    for (int h = b.start_hour; h < b.end_hour; ++h) {
      int& slot = table[day_slot(b.day)][h];
      if (slot != -1) invalid("schedule buckets overlap at hour " + std::to_string(h));
      slot = static_cast<int>(i);
    }
  }
  return table;
}

}  // namespace

ActionVector Scenario::initial_vector() const {
  const auto& actions = rule().actions;
  ActionVector v(actions.size(), 0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    auto it = initial_levels.find(actions[i]);
    if (it != initial_levels.end()) v[i] = it->second;
  }
  return v;
}

const ScheduleBucket& Scenario::bucket_at(Tick t) const {
  DayType d = day_type_at(t);
  int h = hour_at(t);
  for (const auto& b : schedule) {
    if (b.day == d && h >= b.start_hour && h < b.end_hour) return b;
  }
  invalid("no schedule bucket covers hour " + std::to_string(h));
}

void validate(const Scenario& sc) {
  validate(sc.registry);
  const auto n = sc.contexts.size();
  if (n < 2 || n > 7) invalid("scenario needs between 2 and 7 contexts");
  if (std::set<std::string>(sc.contexts.begin(), sc.contexts.end()).size() != n) {
    invalid("context symbols must be distinct");
  }
  const auto& actions = sc.rule().actions;
  for (const auto& a : actions) {
    if (!sc.action_ranges.count(a)) invalid("no range for action " + a);
  }
  for (const auto& [a, max] : sc.action_ranges) {
    if (index_of(actions, a) < 0) invalid("range given for unknown action " + a);
    if (max < 0) invalid("negative range for " + a);
  }
  auto check_level = [&](const std::string& a, int level) {
    auto it = sc.action_ranges.find(a);
    if (it == sc.action_ranges.end()) invalid("unknown action " + a);
    if (level < 0 || level > it->second) invalid("level " + std::to_string(level) + " out of range for " + a);
  };
  for (const auto& [a, level] : sc.initial_levels) check_level(a, level);
  for (const auto& [ctx, partial] : sc.policy) {
    if (index_of(sc.contexts, ctx) < 0) invalid("policy for unknown context " + ctx);
    for (const auto& [a, level] : partial) check_level(a, level);
  }
  for (const auto& a : sc.overridable) {
    if (index_of(actions, a) < 0) invalid("overridable action " + a + " not in rule");
  }
  if (!(sc.override_rate >= 0.0)) invalid("override rate must be non-negative");
  for (const auto& e : sc.exogenous) {
    if (index_of(actions, e.action) < 0) invalid("exogenous action " + e.action + " not in rule");
    if (e.step_minutes < 1) invalid("exogenous step must be >= 1 minute");
  }
  for (const auto& [from, to] : sc.coarse_view) {
    if (index_of(sc.contexts, from) < 0) invalid("coarse view maps unknown context " + from);
    if (to.empty()) invalid("coarse view target must be non-empty");
  }
  auto table = bucket_table(sc);
  for (const auto& day : table) {
    for (int slot : day) {
      if (slot < 0) invalid("schedule does not cover every hour of both day types");
    }
  }
  for (const auto& b : sc.schedule) {
    if (b.transition.size() != n || b.mean_dwell.size() != n) invalid("bucket size does not match contexts");
    for (std::size_t i = 0; i < n; ++i) {
      if (b.transition[i].size() != n) invalid("transition row size mismatch");
      double sum = 0.0;
      for (double p : b.transition[i]) {
        if (!(p >= 0.0)) invalid("negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) invalid("transition row does not sum to 1");
      if (!(b.mean_dwell[i] >= 1.0)) invalid("mean dwell must be at least one minute");
    }
  }
}

namespace {

enum Place { kHome, kWork, kCommute, kGym, kChildcare, kCafe, kFriends };

constexpr std::array<const char*, 7> kPlaceNames = {"home", "work", "commute", "gym",
                                                    "childcare", "cafe", "friends"};

// Fills one bucket for a routine over the first n places. Destinations
// beyond n are dropped; a row with no remaining destination becomes a
// self-loop.
class BucketBuilder {
 public:
  BucketBuilder(int n, DayType day, int start, int end) : n_(n) {
    b_.day = day;
    b_.start_hour = start;
    b_.end_hour = end;
    b_.transition.assign(n, std::vector<double>(n, 0.0));
    b_.mean_dwell.assign(n, 30.0);
    for (int c = 0; c < n; ++c) go(c, 30.0, {{kHome, 1.0}});
    stay(kHome, 600.0);
  }

  BucketBuilder& stay(int c, double dwell) { return go(c, dwell, {}); }

  BucketBuilder& go(int c, double dwell, std::vector<std::pair<int, double>> dests,
                    std::vector<std::pair<int, double>> fallback = {}) {
    if (c >= n_) return *this;
    auto usable = [&](const std::vector<std::pair<int, double>>& d) {
      std::vector<std::pair<int, double>> out;
      for (auto [to, w] : d) {
        if (to < n_ && to != c) out.emplace_back(to, w);
      }
      return out;
    };
    auto chosen = usable(dests);
    if (chosen.empty()) chosen = usable(fallback);
    auto& row = b_.transition[c];
    std::fill(row.begin(), row.end(), 0.0);
    double total = 0.0;
    for (auto [to, w] : chosen) total += w;
    if (chosen.empty()) {
      row[c] = 1.0;
    } else {
      for (auto [to, w] : chosen) row[to] += w / total;
    }
    b_.mean_dwell[c] = dwell;
    return *this;
  }

  ScheduleBucket build() const { return b_; }

 private:
  int n_;
  ScheduleBucket b_;
};

std::vector<ScheduleBucket> phone_routine(int n) {
  std::vector<ScheduleBucket> s;
  const auto wd = DayType::kWeekday;
  const auto we = DayType::kWeekend;

  s.push_back(BucketBuilder(n, wd, 0, 7).stay(kHome, 600).build());
  {
    BucketBuilder b(n, wd, 7, 9);
    b.go(kHome, 45, {{kCommute, 1.0}}, {{kWork, 1.0}});
    b.go(kCommute, 25, {{kWork, 0.8}, {kChildcare, 0.2}});
    b.go(kChildcare, 15, {{kCommute, 1.0}}, {{kWork, 1.0}});
    b.stay(kWork, 600);
    for (int c : {kGym, kCafe, kFriends}) b.go(c, 20, {{kWork, 1.0}});
    s.push_back(b.build());
  }
  for (auto [start, end] : {std::pair{9, 12}, std::pair{14, 17}}) {
    BucketBuilder b(n, wd, start, end);
    b.go(kHome, 60, {{kCommute, 1.0}}, {{kWork, 1.0}});
    b.go(kWork, 400, {{kCafe, 1.0}});
    b.go(kCommute, 20, {{kWork, 1.0}});
    for (int c : {kGym, kChildcare, kCafe, kFriends}) b.go(c, 30, {{kWork, 1.0}});
    s.push_back(b.build());
  }
  {
    BucketBuilder b(n, wd, 12, 14);
    b.go(kHome, 60, {{kCommute, 1.0}}, {{kWork, 1.0}});
    b.go(kWork, 120, {{kCafe, 1.0}});
    b.go(kCommute, 20, {{kWork, 1.0}});
    b.go(kCafe, 40, {{kWork, 1.0}});
    for (int c : {kGym, kChildcare, kFriends}) b.go(c, 30, {{kWork, 1.0}});
    s.push_back(b.build());
  }
  {
    BucketBuilder b(n, wd, 17, 19);
    b.go(kWork, 40, {{kCommute, 1.0}}, {{kHome, 1.0}});
    b.go(kCommute, 30, {{kHome, 0.6}, {kGym, 0.25}, {kChildcare, 0.15}});
    b.go(kGym, 60, {{kCommute, 1.0}}, {{kHome, 1.0}});
    b.go(kChildcare, 15, {{kHome, 1.0}});
    b.go(kHome, 900, {{kFriends, 1.0}});
    b.go(kFriends, 90, {{kHome, 1.0}});
    s.push_back(b.build());
  }
  {
    BucketBuilder b(n, wd, 19, 24);
    b.go(kHome, 500, {{kFriends, 1.0}});
    b.go(kFriends, 120, {{kHome, 1.0}});
    b.go(kWork, 30, {{kCommute, 1.0}}, {{kHome, 1.0}});
    b.go(kCommute, 20, {{kHome, 1.0}});
    s.push_back(b.build());
  }

  s.push_back(BucketBuilder(n, we, 0, 9).stay(kHome, 900).build());
  {
    BucketBuilder b(n, we, 9, 18);
    b.go(kHome, 180, {{kGym, 0.3}, {kCafe, 0.3}, {kFriends, 0.3}, {kCommute, 0.1}});
    b.go(kGym, 90, {{kHome, 1.0}});
    b.go(kCafe, 60, {{kHome, 1.0}});
    b.go(kFriends, 120, {{kHome, 1.0}});
    b.go(kWork, 60, {{kCommute, 1.0}}, {{kHome, 1.0}});
    s.push_back(b.build());
  }
  {
    BucketBuilder b(n, we, 18, 24);
    b.go(kHome, 600, {{kFriends, 1.0}});
    b.go(kFriends, 150, {{kHome, 1.0}});
    s.push_back(b.build());
  }
  return s;
}

const std::vector<std::string>& phone_settings() {
  static const std::vector<std::string> names = {
      "RingerMode",   "TouchSound",     "WiFi",        "RingerVolume",
      "DisplayTimeout", "VibrateOnTouch", "Wallpaper", "DialpadSound",
      "AlarmVolume",  "MediaVolume",    "ScreenBrightness", "LockSound"};
  return names;
}

}  // namespace

Scenario build_phone_preset(int profiles, std::uint64_t seed) {
  if (profiles < 2 || profiles > 7) {
    throw Error(ErrorCode::kProfileCountOutOfRange,
                "profiles must be in 2..7, got " + std::to_string(profiles));
  }
  Scenario sc;
  sc.name = "phone";
  AdaptationRule rule;
  rule.id = 0;
  rule.contexts = {"Location"};
  rule.actions = phone_settings();
  sc.registry.rules.push_back(rule);
  for (int i = 0; i < profiles; ++i) sc.contexts.emplace_back(kPlaceNames[i]);
  sc.dwell_model = DwellModel::kGeometric;
  sc.schedule = phone_routine(profiles);
  sc.action_ranges = {{"RingerMode", 2},     {"TouchSound", 1},       {"WiFi", 1},
                      {"RingerVolume", 7},   {"DisplayTimeout", 6},   {"VibrateOnTouch", 1},
                      {"Wallpaper", 4},      {"DialpadSound", 1},     {"AlarmVolume", 7},
                      {"MediaVolume", 15},   {"ScreenBrightness", 255}, {"LockSound", 1}};
  sc.initial_levels = {{"RingerMode", 2},    {"TouchSound", 1},       {"WiFi", 1},
                       {"RingerVolume", 5},  {"DisplayTimeout", 2},   {"VibrateOnTouch", 1},
                       {"Wallpaper", 0},     {"DialpadSound", 1},     {"AlarmVolume", 5},
                       {"MediaVolume", 8},   {"ScreenBrightness", 128}, {"LockSound", 1}};

  // Each profile configures only some settings. RingerMode, WiFi and
  // ScreenBrightness are set by every profile.
  const std::array<std::map<std::string, int>, 7> base = {{
      {{"RingerMode", 2}, {"WiFi", 1}, {"RingerVolume", 5}, {"ScreenBrightness", 120},
       {"MediaVolume", 8}, {"TouchSound", 1}, {"VibrateOnTouch", 1}, {"DisplayTimeout", 3},
       {"AlarmVolume", 5}},
      {{"RingerMode", 1}, {"WiFi", 1}, {"RingerVolume", 2}, {"ScreenBrightness", 200},
       {"TouchSound", 0}, {"VibrateOnTouch", 0}, {"DisplayTimeout", 1}},
      {{"RingerMode", 0}, {"WiFi", 0}, {"RingerVolume", 7}, {"ScreenBrightness", 250},
       {"MediaVolume", 12}},
      {{"RingerMode", 0}, {"WiFi", 0}, {"ScreenBrightness", 170}, {"MediaVolume", 15},
       {"AlarmVolume", 7}},
      {{"RingerMode", 1}, {"WiFi", 0}, {"RingerVolume", 3}, {"ScreenBrightness", 80}},
      {{"RingerMode", 2}, {"WiFi", 1}, {"RingerVolume", 4}, {"ScreenBrightness", 160},
       {"TouchSound", 0}},
      {{"RingerMode", 0}, {"WiFi", 1}, {"ScreenBrightness", 40}, {"AlarmVolume", 2},
       {"Wallpaper", 2}},
  }};
  std::mt19937_64 rng(derive_seed(seed, hash_label("phone-profiles")));
  auto jitter = [&](int v, int spread, int max) {
    std::uniform_int_distribution<int> d(-spread, spread);
    return std::clamp(v + d(rng), 0, max);
  };
  for (int i = 0; i < profiles; ++i) {
    auto partial = base[i];
    for (auto& [a, level] : partial) {
      if (a == "ScreenBrightness") level = jitter(level, 15, 255);
      if (a == "RingerVolume") level = jitter(level, 1, 7);
      if (a == "MediaVolume") level = jitter(level, 2, 15);
    }
    sc.policy[sc.contexts[i]] = std::move(partial);
  }
  sc.override_rate = 0.2;
  sc.overridable = {"RingerVolume", "AlarmVolume", "MediaVolume", "ScreenBrightness"};
  validate(sc);
  return sc;
}

Scenario build_smart_home_preset(std::uint64_t seed) {
  Scenario sc;
  sc.name = "smart_home";
  AdaptationRule rule;
  rule.id = 0;
  rule.contexts = {"OccupancySensor", "ActivityTracker"};
  rule.actions = {"Setpoint", "HouseTemp"};
  sc.registry.rules.push_back(rule);
  sc.contexts = {"sleep", "away", "active", "relax"};
  enum { kSleep, kAway, kActive, kRelax };
  sc.dwell_model = DwellModel::kGeometric;
  sc.action_ranges = {{"Setpoint", 30}, {"HouseTemp", 40}};
  sc.initial_levels = {{"Setpoint", 18}, {"HouseTemp", 20}};

  std::mt19937_64 rng(derive_seed(seed, hash_label("smart-home")));
  std::uniform_int_distribution<int> nudge(-1, 1);
  sc.policy = {{"sleep", {{"Setpoint", 17 + nudge(rng)}}},
               {"away", {{"Setpoint", 14 + nudge(rng)}}},
               {"active", {{"Setpoint", 21 + nudge(rng)}}},
               {"relax", {{"Setpoint", 23 + nudge(rng)}}}};

  const int n = 4;
  auto bucket = [&](DayType d, int start, int end) {
    ScheduleBucket b;
    b.day = d;
    b.start_hour = start;
    b.end_hour = end;
    b.transition.assign(n, std::vector<double>(n, 0.0));
    b.mean_dwell.assign(n, 60.0);
    for (int c = 0; c < n; ++c) b.transition[c][c] = 1.0;
    return b;
  };
  auto route = [](ScheduleBucket& b, int from, double dwell, std::vector<std::pair<int, double>> to) {
    std::fill(b.transition[from].begin(), b.transition[from].end(), 0.0);
    for (auto [c, w] : to) b.transition[from][c] += w;
    b.mean_dwell[from] = dwell;
  };
  for (DayType d : {DayType::kWeekday, DayType::kWeekend}) {
    const bool weekday = d == DayType::kWeekday;
    auto night = bucket(d, 0, 7);
    route(night, kAway, 30, {{kActive, 1.0}});
    route(night, kActive, 30, {{kSleep, 1.0}});
    route(night, kRelax, 30, {{kSleep, 1.0}});
    route(night, kSleep, 2000, {{kActive, 1.0}});
    sc.schedule.push_back(night);

    auto morning = bucket(d, 7, 9);
    route(morning, kSleep, weekday ? 20 : 90, {{kActive, 1.0}});
    route(morning, kActive, weekday ? 50 : 120, {{weekday ? kAway : kRelax, 1.0}});
    route(morning, kRelax, 60, {{kActive, 1.0}});
    route(morning, kAway, 600, {{kActive, 1.0}});
    sc.schedule.push_back(morning);

    auto day = bucket(d, 9, 17);
    route(day, kSleep, 20, {{kActive, 1.0}});
    route(day, kActive, weekday ? 30 : 120, {{kAway, weekday ? 1.0 : 0.5}, {kRelax, weekday ? 0.0 : 0.5}});
    route(day, kRelax, 90, {{kActive, 0.5}, {kAway, 0.5}});
    route(day, kAway, weekday ? 1000 : 150, {{kActive, 1.0}});
    sc.schedule.push_back(day);

    auto evening = bucket(d, 17, 22);
    route(evening, kAway, weekday ? 40 : 90, {{kActive, 1.0}});
    route(evening, kActive, 70, {{kRelax, 1.0}});
    route(evening, kRelax, 100, {{kActive, 1.0}});
    route(evening, kSleep, 30, {{kActive, 1.0}});
    sc.schedule.push_back(evening);

    auto late = bucket(d, 22, 24);
    route(late, kAway, 30, {{kActive, 1.0}});
    route(late, kActive, 30, {{kSleep, 1.0}});
    route(late, kRelax, 40, {{kSleep, 1.0}});
    route(late, kSleep, 2000, {{kActive, 1.0}});
    sc.schedule.push_back(late);
  }
  sc.override_rate = 0.1;
  sc.overridable = {"Setpoint"};
  sc.exogenous = {{"HouseTemp", 20, 3, 60, -std::numbers::pi / 2}};
  sc.coarse_view = {{"sleep", "home"}, {"away", "away"}, {"active", "home"}, {"relax", "home"}};
  sc.cloud_features = true;
  validate(sc);
  return sc;
}

SimOutput simulate(const Scenario& sc, int days, std::uint64_t seed) {
  validate(sc);
  if (days < 1) throw Error(ErrorCode::kInvalidScenario, "days must be >= 1");
  const AdaptationRule& rule = sc.rule();
  const Tick horizon = static_cast<Tick>(days) * kTicksPerDay;
  const std::size_t width = rule.actions.size();
  const auto table = bucket_table(sc);

  std::vector<std::vector<std::pair<std::size_t, int>>> policy(sc.contexts.size());
  for (std::size_t c = 0; c < sc.contexts.size(); ++c) {
    auto it = sc.policy.find(sc.contexts[c]);
    if (it == sc.policy.end()) continue;
    for (const auto& [a, level] : it->second) {
      policy[c].emplace_back(static_cast<std::size_t>(rule.action_index(a)), level);
    }
  }
  std::vector<int> range(width);
  for (std::size_t i = 0; i < width; ++i) range[i] = sc.action_ranges.at(rule.actions[i]);
  std::vector<std::size_t> overridable;
  for (const auto& a : sc.overridable) overridable.push_back(static_cast<std::size_t>(rule.action_index(a)));

  std::mt19937_64 schedule_rng(derive_seed(seed, hash_label("schedule")));
  std::mt19937_64 override_rng(derive_seed(seed, hash_label("overrides")));
  std::mt19937_64 exo_rng(derive_seed(seed, hash_label("exogenous")));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Poisson arrival ticks for manual overrides.
  std::vector<Tick> override_ticks;
  if (sc.override_rate > 0.0 && !overridable.empty()) {
    std::exponential_distribution<double> gap(sc.override_rate / 60.0);
    double clock = gap(override_rng);
    while (clock < static_cast<double>(horizon)) {
      override_ticks.push_back(static_cast<Tick>(clock));
      clock += gap(override_rng);
    }
  }
  std::vector<int> day_offset(static_cast<std::size_t>(days));
  {
    std::uniform_int_distribution<int> off(-1, 1);
    for (auto& o : day_offset) o = off(exo_rng);
  }
  std::vector<std::size_t> exo_actions;
  for (const auto& e : sc.exogenous) exo_actions.push_back(static_cast<std::size_t>(rule.action_index(e.action)));

  auto bucket_for = [&](Tick t) -> const ScheduleBucket& {
    return sc.schedule[table[day_slot(day_type_at(t))][hour_at(t)]];
  };
  auto draw_next = [&](const ScheduleBucket& b, int from) {
    const auto& row = b.transition[from];
    double u = unit(schedule_rng);
    double acc = 0.0;
    int last_positive = from;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] <= 0.0) continue;
      acc += row[c];
      last_positive = static_cast<int>(c);
      if (u < acc) return static_cast<int>(c);
    }
    return last_positive;
  };

  SimOutput out;
  out.series.rule = rule.id;
  out.series.alphabet = sc.contexts;
  out.series.actions.names = rule.actions;
  out.series.context.resize(static_cast<std::size_t>(horizon));
  out.series.actions.levels.resize(static_cast<std::size_t>(horizon) * width);

  ActionVector current = sc.initial_vector();
  int ctx = 0;
  long remaining = std::lround(bucket_for(0).mean_dwell[0]);
  std::size_t next_override = 0;

  for (Tick t = 0; t < horizon; ++t) {
    bool changed = t == 0;
    if (t > 0) {
      const ScheduleBucket& b = bucket_for(t);
      bool leave = false;
      if (sc.dwell_model == DwellModel::kGeometric) {
        leave = unit(schedule_rng) < 1.0 / b.mean_dwell[ctx];
      } else {
        leave = --remaining <= 0;
      }
      if (leave) {
        int next = draw_next(b, ctx);
        if (sc.dwell_model == DwellModel::kFixed) remaining = std::max(1L, std::lround(b.mean_dwell[next]));
        changed = next != ctx;
        ctx = next;
      }
    }
    const Tick minute = t % kTicksPerDay;
    for (std::size_t e = 0; e < sc.exogenous.size(); ++e) {
      const auto& drive = sc.exogenous[e];
      if (minute % drive.step_minutes != 0) continue;
      double angle = 2.0 * std::numbers::pi * static_cast<double>(minute) / kTicksPerDay + drive.phase;
      int level = drive.base + static_cast<int>(std::lround(drive.amplitude * std::sin(angle))) +
                  day_offset[static_cast<std::size_t>(t / kTicksPerDay)];
      current[exo_actions[e]] = std::clamp(level, 0, range[exo_actions[e]]);
    }
    if (changed) {
      for (auto [a, level] : policy[ctx]) current[a] = level;
      out.log.push_back({t, rule.id, sc.contexts[ctx], current});
    }
    while (next_override < override_ticks.size() && override_ticks[next_override] == t) {
      ++next_override;
      std::uniform_int_distribution<std::size_t> pick(0, overridable.size() - 1);
      std::size_t a = overridable[pick(override_rng)];
      int step = unit(override_rng) < 0.5 ? -1 : 1;
      if (changed) continue;  // a manual change never coincides with an adaptation
      current[a] = std::clamp(current[a] + step, 0, range[a]);
      out.overrides.push_back({t, rule.actions[a], current[a]});
    }
    out.series.context[static_cast<std::size_t>(t)] = ctx;
    std::copy(current.begin(), current.end(), out.series.actions.row(t).begin());
  }
  return out;
}

TickSeries coarsen(const TickSeries& series, const std::map<std::string, std::string>& view) {
  TickSeries out;
  out.rule = series.rule;
  out.actions = series.actions;
  std::vector<int> remap(series.alphabet.size());
  for (std::size_t i = 0; i < series.alphabet.size(); ++i) {
    auto it = view.find(series.alphabet[i]);
    remap[i] = out.intern(it == view.end() ? series.alphabet[i] : it->second);
  }
  out.context.reserve(series.context.size());
  for (int c : series.context) out.context.push_back(remap[c]);
  return out;
}

}  // namespace adaptleak
