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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptleak/core.hpp"
#include "adaptleak/registry.hpp"

namespace adaptleak {

enum class MethodKind { kNone, kDelay, kSuppression, kRowMask, kFeatureMask };

std::string_view to_string(MethodKind kind);
/// Throws ConfigError for an unknown name.
MethodKind method_kind_from_string(std::string_view name);

struct MitigationMethod {
  MethodKind kind = MethodKind::kNone;
  double magnitude = 0.0;  // d ticks, k records or p

  static MitigationMethod none() { return {}; }
  static MitigationMethod delay(Tick d) { return {MethodKind::kDelay, static_cast<double>(d)}; }
  static MitigationMethod suppression(int k) { return {MethodKind::kSuppression, static_cast<double>(k)}; }
  static MitigationMethod row_mask(double p) { return {MethodKind::kRowMask, p}; }
  static MitigationMethod feature_mask(double p) { return {MethodKind::kFeatureMask, p}; }

  friend bool operator==(const MitigationMethod&, const MitigationMethod&) = default;
};

/// Throws ConfigError unless d >= 0 (integral), k >= 1 (integral), p in [0, 1].
void validate(const MitigationMethod& m);

inline constexpr Tick kMinRandomDelay = 15;
inline constexpr Tick kMaxRandomDelay = 120;

/// Uniform integer in [15, 120], a pure function of the seed.
Tick draw_delay(std::uint64_t seed);

struct Ladder {
  std::vector<int> suppression_ks{2, 3, 5, 8};
  std::vector<double> mask_ps{0.2, 0.4, 0.6, 0.8};
  Tick window = kTicksPerDay;
  std::vector<MethodKind> order{MethodKind::kSuppression, MethodKind::kRowMask, MethodKind::kFeatureMask};

  std::size_t steps(MethodKind kind) const;
  MitigationMethod at(MethodKind kind, std::size_t step) const;
};

/// Throws ConfigError on empty or non-increasing magnitudes, a window < 1, or
/// an order naming None or Delay.
void validate(const Ladder& ladder);

/// The true action history of one rule: every change point (adaptations,
/// manual overrides, exogenous drift) plus the adaptation records that
/// delimit intervals.
class TruthHistory {
 public:
  TruthHistory() = default;
  explicit TruthHistory(ActionVector initial) : initial_(std::move(initial)) {}

  /// Throws NonMonotoneTimestamp if t precedes the last event.
  void on_adaptation(Tick t, const ActionVector& actions);
  void on_value_change(Tick t, const ActionVector& actions);

  /// Vector in force at tick t (the initial vector before any change).
  const ActionVector& value_at(Tick t) const;
  /// Number of adaptation records with time <= t. Interval i >= 1 starts at
  /// record i - 1; interval 0 precedes the first record.
  std::size_t interval_at(Tick t) const;
  /// Half-open tick range around t over which value_at and interval_at are
  /// constant.
  std::pair<Tick, Tick> constant_span(Tick t) const;
  const ActionVector& record(std::size_t i) const { return records_[i].second; }
  std::size_t record_count() const { return records_.size(); }
  Tick last_event() const { return last_event_; }
  std::size_t width() const { return initial_.size(); }

 private:
  ActionVector initial_;
  std::vector<std::pair<Tick, ActionVector>> changes_;
  std::vector<std::pair<Tick, ActionVector>> records_;
  Tick last_event_ = 0;
};

/// Mediation state for one (observer, rule). The first regime is a fixed
/// delay d; the second regime is one of Suppression, RowMask or FeatureMask.
/// Every coin is a pure function of (seed, interval index, action index).
class MitigationState {
 public:
  MitigationState(const AdaptationRule& rule, ActionVector initial, std::uint64_t seed);
  /// Starts from an existing history, e.g. when an observer is flagged late.
  MitigationState(const AdaptationRule& rule, TruthHistory history, std::uint64_t seed);

  void on_adaptation_event(const AdaptationRecord& rec);
  void on_value_change(Tick t, const ActionVector& actions);

  /// Sets the delay (kDelay) or replaces the second-regime method; kNone
  /// clears both. Clears the decision cache.
  void apply(const MitigationMethod& m);
  Tick delay() const { return delay_; }
  const MitigationMethod& method() const { return second_; }

  /// Ladder position of the second-regime method, if it came from a ladder.
  std::optional<std::size_t> ladder_step() const { return step_; }
  void set_ladder_step(std::optional<std::size_t> step) { step_ = step; }

  /// Level served for `action` at tick t. Throws UnknownAction.
  int mediate_get(std::string_view action, Tick t);
  int mediate_get(std::size_t action_index, Tick t);

  const TruthHistory& history() const { return history_; }
  const AdaptationRule& rule() const { return rule_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t cache_hits() const { return cache_hits_; }

 private:
  struct CachedAnswer {
    Tick from = 0;  // delayed-time range the answer holds over
    Tick to = -1;
    int level = 0;
  };

  int compute(std::size_t action, Tick td, CachedAnswer& slot) const;

  AdaptationRule rule_;
  std::uint64_t seed_;
  TruthHistory history_;
  Tick delay_ = 0;
  MitigationMethod second_;
  std::optional<std::size_t> step_;
  std::vector<CachedAnswer> cache_;
  std::uint64_t cache_hits_ = 0;
};

/// Normalized MI between the true context and the served tuple, one sample
/// per tick. Throws LengthMismatch unless the horizons agree.
double effective_mi(const ActionTimeline& served, const TickSeries& truth);

/// Per-tick reconstruction of what an observer polling `actions` every
/// `cadence` ticks over [from, to) holds (last-value-hold between reads).
ActionTimeline observe(MitigationState& state, const std::vector<std::string>& actions, Tick from, Tick to,
                       Tick cadence = 1);

enum class ControllerOutcome { kHold, kEscalate, kSwitch, kExhausted };

std::string_view to_string(ControllerOutcome outcome);

/// Puts the state on the first rung of `start` and, when `with_delay`, fixes
/// a delay drawn from the state's seed.
void activate(MitigationState& state, const Ladder& ladder, MethodKind start, bool with_delay);

/// Above threshold: next magnitude on the current ladder, else the next
/// method in switch order at its lowest magnitude, else Exhausted (state held
/// at maximum). At or below threshold: Hold. The delay is never touched.
ControllerOutcome controller_step(MitigationState& state, const Ladder& ladder, double effective, double threshold);

struct AuditEvent {
  Tick t = 0;
  std::string observer;
  std::string method;
  double magnitude = 0.0;
  std::string event;  // serve | escalate | switch | exhausted

  friend bool operator==(const AuditEvent&, const AuditEvent&) = default;
};

/// Serves reads for every observer of one rule. Observers that were never
/// flagged, and the rule's owner, read the true current value.
class Mediator {
 public:
  Mediator(const AdaptationRule& rule, ActionVector initial, std::uint64_t seed, std::string owner = {});

  void on_adaptation_event(const AdaptationRecord& rec);
  void on_value_change(Tick t, const ActionVector& actions);

  /// Creates the observer's state on first use, seeded with the history so far.
  MitigationState& flag(const std::string& observer);
  bool flagged(const std::string& observer) const { return states_.count(observer) != 0; }
  MitigationState* state(const std::string& observer);

  int get(const std::string& observer, std::string_view action, Tick t);

  const TruthHistory& truth() const { return truth_.history(); }

 private:
  std::uint64_t seed_;
  std::string owner_;
  MitigationState truth_;
  std::map<std::string, MitigationState> states_;
};

}  // namespace adaptleak
