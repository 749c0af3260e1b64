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

#include "adaptleak/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adaptleak/error.hpp"
#include "adaptleak/infodetect.hpp"
#include "adaptleak/rng.hpp"

namespace adaptleak {
namespace {

// Coin salts. Feature-mask coins use the action index itself, which stays
// far below these.
constexpr std::uint64_t kRowCoin = 1ULL << 40;
constexpr std::uint64_t kSuppressionCoin = 1ULL << 41;
constexpr std::uint64_t kDelayCoin = 1ULL << 42;

constexpr Tick kForever = std::numeric_limits<Tick>::max();

bool is_integral(double v) { return std::floor(v) == v; }

}  // namespace

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::kNone:
      return "None";
    case MethodKind::kDelay:
      return "Delay";
    case MethodKind::kSuppression:
      return "Suppression";
    case MethodKind::kRowMask:
      return "RowMask";
    case MethodKind::kFeatureMask:
      return "FeatureMask";
  }
  return "None";
}

MethodKind method_kind_from_string(std::string_view name) {
  for (auto k : {MethodKind::kNone, MethodKind::kDelay, MethodKind::kSuppression, MethodKind::kRowMask,
                 MethodKind::kFeatureMask}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kConfigError, "unknown mitigation method '" + std::string(name) + "'");
}

void validate(const MitigationMethod& m) {
  const double v = m.magnitude;
  switch (m.kind) {
    case MethodKind::kNone:
      return;
    case MethodKind::kDelay:
      if (v < 0.0 || !is_integral(v)) throw Error(ErrorCode::kConfigError, "delay must be a non-negative tick count");
      return;
    case MethodKind::kSuppression:
      if (v < 1.0 || !is_integral(v)) throw Error(ErrorCode::kConfigError, "suppression k must be an integer >= 1");
      return;
    case MethodKind::kRowMask:
    case MethodKind::kFeatureMask:
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kConfigError, "mask probability must lie in [0, 1]");
      return;
  }
}

Tick draw_delay(std::uint64_t seed) {
  const Tick span = kMaxRandomDelay - kMinRandomDelay + 1;
  return kMinRandomDelay + static_cast<Tick>(keyed_uniform(seed, kDelayCoin, 0) * static_cast<double>(span));
}

std::size_t Ladder::steps(MethodKind kind) const {
  switch (kind) {
    case MethodKind::kSuppression:
      return suppression_ks.size();
    case MethodKind::kRowMask:
    case MethodKind::kFeatureMask:
      return mask_ps.size();
    default:
      return 0;
  }
}

MitigationMethod Ladder::at(MethodKind kind, std::size_t step) const {
  switch (kind) {
    case MethodKind::kSuppression:
      return MitigationMethod::suppression(suppression_ks.at(step));
    case MethodKind::kRowMask:
      return MitigationMethod::row_mask(mask_ps.at(step));
    case MethodKind::kFeatureMask:
      return MitigationMethod::feature_mask(mask_ps.at(step));
    default:
      throw Error(ErrorCode::kConfigError, std::string(to_string(kind)) + " has no ladder");
  }
}

void validate(const Ladder& ladder) {
  if (ladder.suppression_ks.empty() || ladder.mask_ps.empty()) {
    throw Error(ErrorCode::kConfigError, "ladder magnitudes must be non-empty");
  }
  for (std::size_t i = 0; i < ladder.suppression_ks.size(); ++i) {
    validate(MitigationMethod::suppression(ladder.suppression_ks[i]));
    if (i > 0 && ladder.suppression_ks[i] <= ladder.suppression_ks[i - 1]) {
      throw Error(ErrorCode::kConfigError, "suppression ladder must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < ladder.mask_ps.size(); ++i) {
    validate(MitigationMethod::row_mask(ladder.mask_ps[i]));
    if (i > 0 && ladder.mask_ps[i] <= ladder.mask_ps[i - 1]) {
      throw Error(ErrorCode::kConfigError, "mask ladder must be strictly increasing");
    }
  }
  if (ladder.window < 1) throw Error(ErrorCode::kConfigError, "controller window must be at least one tick");
  if (ladder.order.empty()) throw Error(ErrorCode::kConfigError, "switch order must be non-empty");
  for (auto k : ladder.order) {
    if (k == MethodKind::kNone || k == MethodKind::kDelay) {
      throw Error(ErrorCode::kConfigError, "switch order may only name second-regime methods");
    }
  }
}

void TruthHistory::on_adaptation(Tick t, const ActionVector& actions) {
  on_value_change(t, actions);
  records_.emplace_back(t, actions);
}

void TruthHistory::on_value_change(Tick t, const ActionVector& actions) {
  if (!changes_.empty() && t < last_event_) {
    throw Error(ErrorCode::kNonMonotoneTimestamp,
                "event at " + std::to_string(t) + " precedes " + std::to_string(last_event_));
  }
  if (actions.size() != initial_.size()) throw Error(ErrorCode::kWrongActionSet, "action vector width mismatch");
  changes_.emplace_back(t, actions);
  last_event_ = t;
}

const ActionVector& TruthHistory::value_at(Tick t) const {
  auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                             [](Tick v, const auto& c) { return v < c.first; });
  return it == changes_.begin() ? initial_ : std::prev(it)->second;
}

std::size_t TruthHistory::interval_at(Tick t) const {
  auto it = std::upper_bound(records_.begin(), records_.end(), t,
                             [](Tick v, const auto& c) { return v < c.first; });
  return static_cast<std::size_t>(it - records_.begin());
}

std::pair<Tick, Tick> TruthHistory::constant_span(Tick t) const {
  auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                             [](Tick v, const auto& c) { return v < c.first; });
  const Tick from = it == changes_.begin() ? std::numeric_limits<Tick>::min() : std::prev(it)->first;
  const Tick to = it == changes_.end() ? kForever : it->first;
  return {from, to};
}

MitigationState::MitigationState(const AdaptationRule& rule, ActionVector initial, std::uint64_t seed)
    : MitigationState(rule, TruthHistory(std::move(initial)), seed) {}

MitigationState::MitigationState(const AdaptationRule& rule, TruthHistory history, std::uint64_t seed)
    : rule_(rule), seed_(seed), history_(std::move(history)), cache_(rule_.actions.size()) {
  if (history_.width() != rule_.actions.size()) {
    throw Error(ErrorCode::kWrongActionSet, "initial vector does not match the rule's actions");
  }
}

void MitigationState::on_adaptation_event(const AdaptationRecord& rec) {
  history_.on_adaptation(rec.t, rec.actions);
  std::fill(cache_.begin(), cache_.end(), CachedAnswer{});
}

void MitigationState::on_value_change(Tick t, const ActionVector& actions) {
  history_.on_value_change(t, actions);
  std::fill(cache_.begin(), cache_.end(), CachedAnswer{});
}

void MitigationState::apply(const MitigationMethod& m) {
  validate(m);
  if (m.kind == MethodKind::kNone) {
    delay_ = 0;
    second_ = {};
    step_.reset();
  } else if (m.kind == MethodKind::kDelay) {
    delay_ = static_cast<Tick>(m.magnitude);
  } else {
    second_ = m;
  }
  std::fill(cache_.begin(), cache_.end(), CachedAnswer{});
}

int MitigationState::mediate_get(std::string_view action, Tick t) {
  const int idx = rule_.action_index(action);
  if (idx < 0) throw Error(ErrorCode::kUnknownAction, "'" + std::string(action) + "' is not an action of this rule");
  return mediate_get(static_cast<std::size_t>(idx), t);
}

int MitigationState::mediate_get(std::size_t action_index, Tick t) {
  if (action_index >= cache_.size()) throw Error(ErrorCode::kUnknownAction, "action index out of range");
  const Tick td = std::max<Tick>(t - delay_, 0);
  CachedAnswer& slot = cache_[action_index];
  if (td >= slot.from && td < slot.to) {
    ++cache_hits_;
    return slot.level;
  }
  return compute(action_index, td, slot);
}

// Every coin is keyed by the interval, so the answer only moves at change
// points; the cached range is the delayed-time span between two of them.
int MitigationState::compute(std::size_t action, Tick td, CachedAnswer& slot) const {
  const std::size_t interval = history_.interval_at(td);
  int level = history_.value_at(td)[action];
  switch (second_.kind) {
    case MethodKind::kRowMask:
      if (keyed_uniform(seed_, interval, kRowCoin) < second_.magnitude) level = 0;
      break;
    case MethodKind::kFeatureMask:
      if (keyed_uniform(seed_, interval, action) < second_.magnitude) level = 0;
      break;
    case MethodKind::kSuppression: {
      const std::size_t k = static_cast<std::size_t>(second_.magnitude);
      const std::size_t pool = std::min(k, interval);
      if (pool >= 2) {
        const auto j = static_cast<std::size_t>(keyed_uniform(seed_, interval, kSuppressionCoin) *
                                                static_cast<double>(pool));
        if (j > 0) level = history_.record(interval - 1 - j)[action];
      }
      break;
    }
    default:
      break;
  }
  const auto [from, to] = history_.constant_span(td);
  slot = {from, to, level};
  return level;
}


double effective_mi(const ActionTimeline& served, const TickSeries& truth) {
  if (served.horizon() != truth.horizon()) {
    throw Error(ErrorCode::kLengthMismatch, "served log covers " + std::to_string(served.horizon()) +
                                                " ticks, truth " + std::to_string(truth.horizon()));
  }
  return normalized_mi(tick_histogram(truth.context, served));
}

ActionTimeline observe(MitigationState& state, const std::vector<std::string>& actions, Tick from, Tick to,
                       Tick cadence) {
  if (cadence < 1) throw Error(ErrorCode::kConfigError, "cadence must be at least one tick");
  std::vector<std::size_t> idx;
  idx.reserve(actions.size());
  for (const auto& a : actions) {
    const int i = state.rule().action_index(a);
    if (i < 0) throw Error(ErrorCode::kUnknownAction, "'" + a + "' is not an action of this rule");
    idx.push_back(static_cast<std::size_t>(i));
  }
  ActionTimeline out;
  out.names = actions;
  const Tick n = std::max<Tick>(to - from, 0);
  out.levels.resize(static_cast<std::size_t>(n) * actions.size());
  std::vector<int> held(actions.size(), 0);
  for (Tick t = from; t < to; ++t) {
    if ((t - from) % cadence == 0) {
      for (std::size_t c = 0; c < idx.size(); ++c) held[c] = state.mediate_get(idx[c], t);
    }
    std::copy(held.begin(), held.end(), out.row(t - from).begin());
  }
  return out;
}

std::string_view to_string(ControllerOutcome outcome) {
  switch (outcome) {
    case ControllerOutcome::kHold:
      return "hold";
    case ControllerOutcome::kEscalate:
      return "escalate";
    case ControllerOutcome::kSwitch:
      return "switch";
    case ControllerOutcome::kExhausted:
      return "exhausted";
  }
  return "hold";
}

void activate(MitigationState& state, const Ladder& ladder, MethodKind start, bool with_delay) {
  state.apply(ladder.at(start, 0));
  state.set_ladder_step(0);
  if (with_delay) state.apply(MitigationMethod::delay(draw_delay(state.seed())));
}

ControllerOutcome controller_step(MitigationState& state, const Ladder& ladder, double effective, double threshold) {
  if (!(effective > threshold)) return ControllerOutcome::kHold;
  const MethodKind kind = state.method().kind;
  auto pos = std::find(ladder.order.begin(), ladder.order.end(), kind);
  if (pos == ladder.order.end()) {
    state.apply(ladder.at(ladder.order.front(), 0));
    state.set_ladder_step(0);
    return ControllerOutcome::kSwitch;
  }
  const std::size_t step = state.ladder_step().value_or(0);
  if (step + 1 < ladder.steps(kind)) {
    state.apply(ladder.at(kind, step + 1));
    state.set_ladder_step(step + 1);
    return ControllerOutcome::kEscalate;
  }
  if (std::next(pos) != ladder.order.end()) {
    state.apply(ladder.at(*std::next(pos), 0));
    state.set_ladder_step(0);
    return ControllerOutcome::kSwitch;
  }
  return ControllerOutcome::kExhausted;
}

Mediator::Mediator(const AdaptationRule& rule, ActionVector initial, std::uint64_t seed, std::string owner)
    : seed_(seed), owner_(std::move(owner)), truth_(rule, std::move(initial), seed) {}

void Mediator::on_adaptation_event(const AdaptationRecord& rec) {
  truth_.on_adaptation_event(rec);
  for (auto& [id, st] : states_) st.on_adaptation_event(rec);
}

void Mediator::on_value_change(Tick t, const ActionVector& actions) {
  truth_.on_value_change(t, actions);
  for (auto& [id, st] : states_) st.on_value_change(t, actions);
}

MitigationState& Mediator::flag(const std::string& observer) {
  auto it = states_.find(observer);
  if (it == states_.end()) {
    const std::uint64_t seed =
        derive_seed(derive_seed(seed_, hash_label(observer)), static_cast<std::uint64_t>(truth_.rule().id));
    it = states_.emplace(observer, MitigationState(truth_.rule(), truth_.history(), seed)).first;
  }
  return it->second;
}

MitigationState* Mediator::state(const std::string& observer) {
  auto it = states_.find(observer);
  return it == states_.end() ? nullptr : &it->second;
}

int Mediator::get(const std::string& observer, std::string_view action, Tick t) {
  if (observer != owner_) {
    if (auto* st = state(observer)) return st->mediate_get(action, t);
  }
  return truth_.mediate_get(action, t);
}

}  // namespace adaptleak
