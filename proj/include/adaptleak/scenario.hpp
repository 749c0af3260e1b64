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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adaptleak/core.hpp"
#include "adaptleak/registry.hpp"

namespace adaptleak {

enum class DayType { kWeekday, kWeekend };

inline DayType day_type_at(Tick t) { return (t / kTicksPerDay) % 7 < 5 ? DayType::kWeekday : DayType::kWeekend; }
inline int hour_at(Tick t) { return static_cast<int>((t % kTicksPerDay) / 60); }

/// How long a context is held once entered.
///  kGeometric: every tick the current context is left with probability
///              1 / mean_dwell of the bucket in force at that tick.
///  kFixed:     the context is held exactly round(mean_dwell) ticks, taken
///              from the bucket in force when it was entered.
enum class DwellModel { kGeometric, kFixed };

/// Transition structure in force for one day type over [start_hour, end_hour).
struct ScheduleBucket {
  DayType day = DayType::kWeekday;
  int start_hour = 0;
  int end_hour = 24;
  std::vector<std::vector<double>> transition;  // contexts x contexts, rows sum to 1
  std::vector<double> mean_dwell;               // minutes, per context
};

/// Action driven by something other than the adaptation rule (outdoor
/// weather pushing the house temperature, say). Re-evaluated every
/// `step_minutes` as base + round(amplitude * sin(2*pi*minute_of_day/1440 + phase))
/// plus a per-day seeded offset in {-1, 0, 1}.
struct ExogenousDrive {
  std::string action;
  int base = 0;
  int amplitude = 0;
  int step_minutes = 60;
  double phase = 0.0;
};

/// A synthetic context-aware deployment. Only the first rule of `registry`
/// is simulated.
struct Scenario {
  std::string name;
  Registry registry;
  std::vector<std::string> contexts;  // contexts[0] is the state at t = 0
  DwellModel dwell_model = DwellModel::kGeometric;
  std::vector<ScheduleBucket> schedule;
  std::map<std::string, std::map<std::string, int>> policy;  // context -> partial vector
  std::map<std::string, int> initial_levels;
  std::map<std::string, int> action_ranges;  // max level, min is 0
  double override_rate = 0.2;                // manual overrides per hour
  std::vector<std::string> overridable;
  std::vector<ExogenousDrive> exogenous;
  std::map<std::string, std::string> coarse_view;  // optional context collapse
  bool cloud_features = false;

  const AdaptationRule& rule() const { return registry.rules.front(); }
  ActionVector initial_vector() const;
  /// Index of the bucket in force at tick t.
  const ScheduleBucket& bucket_at(Tick t) const;
};

void validate(const Scenario& sc);

/// Phone-settings deployment: one rule from a location source to the twelve
/// phone settings, `profiles` location profiles with distinct partial
/// settings, and a weekday/weekend routine.
Scenario build_phone_preset(int profiles, std::uint64_t seed);

/// Thermostat deployment: activity contexts driving {Setpoint, HouseTemp},
/// with HouseTemp an exogenous series and an occupancy (home/away) view.
Scenario build_smart_home_preset(std::uint64_t seed);

struct Override {
  Tick t = 0;
  std::string action;
  int level = 0;

  friend bool operator==(const Override&, const Override&) = default;
};

struct SimOutput {
  TickSeries series;
  RecordLog log;
  std::vector<Override> overrides;
};

/// days * 1440 ticks. A record is emitted at t = 0 and at every context
/// change, applying the context's partial profile over the current vector.
/// Overrides arrive as a Poisson process and move one overridable action by
/// one level; overrides landing on an adaptation tick are dropped.
SimOutput simulate(const Scenario& sc, int days, std::uint64_t seed);

/// Relabels contexts through `view` (e.g. activity -> home/away).
TickSeries coarsen(const TickSeries& series, const std::map<std::string, std::string>& view);

}  // namespace adaptleak
