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

#include "adaptleak/infodetect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "adaptleak/error.hpp"

namespace adaptleak {

double entropy(std::span<const double> dist) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kNotADistribution, "negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kNotADistribution, "probabilities sum to " + std::to_string(sum));
  }
  double h = 0.0;
  for (double p : dist) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

void JointHistogram::add(int context, std::span<const int> tuple, std::int64_t count) {
  if (count <= 0) return;
  std::vector<int> key(tuple.begin(), tuple.end());
  auto [it, inserted] = tuple_ids_.try_emplace(std::move(key), static_cast<int>(tuple_ids_.size()));
  cells_[{context, it->second}] += count;
  total_ += count;
}

std::map<int, std::int64_t> JointHistogram::context_marginal() const {
  std::map<int, std::int64_t> m;
  for (const auto& [key, n] : cells_) m[key.first] += n;
  return m;
}

std::map<int, std::int64_t> JointHistogram::tuple_marginal() const {
  std::map<int, std::int64_t> m;
  for (const auto& [key, n] : cells_) m[key.second] += n;
  return m;
}

JointHistogram JointHistogram::transposed() const {
  JointHistogram t;
  for (const auto& [key, n] : cells_) {
    const int ctx = key.first;
    t.add(key.second, std::span<const int>(&ctx, 1), n);
  }
  return t;
}

namespace {

// Plug-in MI from integer counts: sum n_ca/n * log2(n * n_ca / (n_c * n_a)).
double mi_term(std::int64_t n, std::int64_t n_ca, std::int64_t n_c, std::int64_t n_a) {
  const double num = static_cast<double>(n) * static_cast<double>(n_ca);
  const double den = static_cast<double>(n_c) * static_cast<double>(n_a);
  return static_cast<double>(n_ca) / static_cast<double>(n) * std::log2(num / den);
}

double entropy_of_counts(const std::map<int, std::int64_t>& counts, std::int64_t n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double mutual_information(const JointHistogram& joint) {
  const std::int64_t n = joint.total();
  if (n <= 0) throw Error(ErrorCode::kEmptyHistogram, "histogram has no samples");
  const auto pc = joint.context_marginal();
  const auto pa = joint.tuple_marginal();
  double mi = 0.0;
  joint.for_each_cell([&](int c, int a, std::int64_t n_ca) { mi += mi_term(n, n_ca, pc.at(c), pa.at(a)); });
  return std::max(0.0, mi);
}

double normalized_mi(const JointHistogram& joint) {
  const std::int64_t n = joint.total();
  if (n <= 0) return 0.0;
  const double hc = entropy_of_counts(joint.context_marginal(), n);
  if (hc <= 0.0) return 0.0;
  return std::clamp(mutual_information(joint) / hc, 0.0, 1.0);
}

JointHistogram tick_histogram(std::span<const int> contexts, const ActionTimeline& served) {
  if (static_cast<Tick>(contexts.size()) != served.horizon()) {
    throw Error(ErrorCode::kLengthMismatch, "context and served timelines differ in length");
  }
  SampleCounts samples(served.width());
  for (Tick t = 0; t < served.horizon(); ++t) samples.add(contexts[t], served.row(t));
  JointHistogram joint;
  for (std::size_t r = 0; r < samples.distinct_rows(); ++r) {
    joint.add(samples.context(r), samples.actions(r), samples.count(r));
  }
  return joint;
}

void SampleCounts::add(int context, std::span<const int> actions, std::int64_t count) {
  if (actions.size() != width_) throw Error(ErrorCode::kWrongActionSet, "sample width mismatch");
  if (count <= 0) return;
  total_ += count;
  // Consecutive ticks usually repeat the previous row.
  if (last_row_ < counts_.size() && scratch_[0] == context &&
      std::equal(actions.begin(), actions.end(), scratch_.begin() + 1)) {
    counts_[last_row_] += count;
    return;
  }
  scratch_.assign(1, context);
  scratch_.insert(scratch_.end(), actions.begin(), actions.end());
  auto [it, inserted] = index_.try_emplace(scratch_, counts_.size());
  if (inserted) {
    keys_.insert(keys_.end(), scratch_.begin(), scratch_.end());
    counts_.push_back(count);
  } else {
    counts_[it->second] += count;
  }
  last_row_ = it->second;
}

void SampleCounts::add_series(const TickSeries& series, Tick from, Tick to) {
  for (Tick t = from; t < to; ++t) add(series.context[t], series.actions.row(t));
}

namespace {

// Per-table precomputation: each column's distinct levels are rank-coded and
// packed into a 64-bit key when they fit, so a subset projection is a mask
// of OR-ed column codes.
class SubsetScorer {
 public:
  explicit SubsetScorer(const SampleCounts& s) : s_(s) {
    const std::size_t rows = s.distinct_rows();
    const std::size_t width = s.width();
    std::map<int, std::int64_t> ctx;
    for (std::size_t r = 0; r < rows; ++r) ctx[s.context(r)] += s.count(r);
    ctx_count_ = ctx;
    h_context_ = s.total() > 0 ? entropy_of_counts(ctx, s.total()) : 0.0;

    int bits_used = 0;
    packed_ = true;
    codes_.assign(rows * width, 0);
    for (std::size_t col = 0; col < width; ++col) {
      std::vector<int> levels;
      levels.reserve(rows);
      for (std::size_t r = 0; r < rows; ++r) levels.push_back(s.actions(r)[col]);
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      const int bits = std::max(1, static_cast<int>(std::bit_width(levels.size())));
      if (bits_used + bits > 64) packed_ = false;
      for (std::size_t r = 0; r < rows && packed_; ++r) {
        auto rank = std::lower_bound(levels.begin(), levels.end(), s.actions(r)[col]) - levels.begin();
        codes_[r * width + col] = static_cast<std::uint64_t>(rank) << bits_used;
      }
      bits_used += bits;
    }
  }

  double score(ActionMask mask) const {
    if (h_context_ <= 0.0) return 0.0;
    const double mi = packed_ ? mi_packed(mask) : mi_generic(mask);
    return std::clamp(mi / h_context_, 0.0, 1.0);
  }

 private:
  struct Item {
    std::uint64_t key;
    int ctx;
    std::int64_t count;
  };

  double mi_packed(ActionMask mask) const {
    const std::size_t rows = s_.distinct_rows();
    const std::size_t width = s_.width();
    std::vector<Item> items(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint64_t key = 0;
      for (ActionMask m = mask; m != 0; m &= m - 1) key |= codes_[r * width + std::countr_zero(m)];
      items[r] = {key, s_.context(r), s_.count(r)};
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.key != b.key ? a.key < b.key : a.ctx < b.ctx; });
    return accumulate(items, [](const Item& a, const Item& b) { return a.key == b.key; });
  }

  double mi_generic(ActionMask mask) const {
    struct GItem {
      std::vector<int> key;
      int ctx;
      std::int64_t count;
    };
    std::vector<GItem> items;
    for (std::size_t r = 0; r < s_.distinct_rows(); ++r) {
      GItem g{{}, s_.context(r), s_.count(r)};
      for (ActionMask m = mask; m != 0; m &= m - 1) g.key.push_back(s_.actions(r)[std::countr_zero(m)]);
      items.push_back(std::move(g));
    }
    std::sort(items.begin(), items.end(),
              [](const GItem& a, const GItem& b) { return a.key != b.key ? a.key < b.key : a.ctx < b.ctx; });
    return accumulate(items, [](const GItem& a, const GItem& b) { return a.key == b.key; });
  }

  template <typename Items, typename SameKey>
  double accumulate(const Items& items, SameKey same_key) const {
    const std::int64_t n = s_.total();
    double mi = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
      std::size_t j = i;
      std::int64_t n_a = 0;
      while (j < items.size() && same_key(items[i], items[j])) n_a += items[j++].count;
      std::size_t k = i;
      while (k < j) {
        std::int64_t n_ca = 0;
        const int c = items[k].ctx;
        while (k < j && items[k].ctx == c) n_ca += items[k++].count;
        mi += mi_term(n, n_ca, ctx_count_.at(c), n_a);
      }
      i = j;
    }
    return std::max(0.0, mi);
  }

  const SampleCounts& s_;
  std::map<int, std::int64_t> ctx_count_;
  double h_context_ = 0.0;
  bool packed_ = true;
  std::vector<std::uint64_t> codes_;
};

}  // namespace

double subset_score(const SampleCounts& samples, ActionMask mask) {
  if (samples.total() <= 0) return 0.0;
  return SubsetScorer(samples).score(mask);
}

void update_mi_table(MITable& table, const SampleCounts& samples) {
  if (samples.width() != table.actions.size()) {
    throw Error(ErrorCode::kWrongActionSet, "samples do not match the table's actions");
  }
  if (samples.total() <= 0) {
    std::fill(table.values.begin(), table.values.end(), 0.0);
    return;
  }
  SubsetScorer scorer(samples);
  table.values[0] = 0.0;
  for (ActionMask mask = 1; mask < table.values.size(); ++mask) table.values[mask] = scorer.score(mask);
}

void update_mi_tables(MITables& tables, std::span<const TickSeries> series) {
  for (const auto& s : series) {
    for (auto& table : tables) {
      if (table.rule_id != s.rule) continue;
      if (s.actions.names != table.actions) {
        throw Error(ErrorCode::kWrongActionSet, "series columns do not match rule " + std::to_string(s.rule));
      }
      SampleCounts samples(s.actions.width());
      samples.add_series(s, 0, s.horizon());
      update_mi_table(table, samples);
    }
  }
}

void SuspicionLedger::note_observation(const std::string& observer, int rule_id, std::string_view action,
                                       const MITables& tables) {
  const MITable* table = nullptr;
  for (const auto& t : tables) {
    if (t.rule_id == rule_id) table = &t;
  }
  int bit = -1;
  if (table != nullptr) {
    for (std::size_t i = 0; i < table->actions.size(); ++i) {
      if (table->actions[i] == action) bit = static_cast<int>(i);
    }
  }
  if (bit < 0) {
    throw Error(ErrorCode::kNotAProtectedGetter,
                std::string(action) + " is not protected under adaptation " + std::to_string(rule_id));
  }
  SuspicionEntry& e = entries_[observer][rule_id];
  e.mask |= ActionMask{1} << bit;
  e.score = table->at(e.mask);
}

void SuspicionLedger::refresh(const MITables& tables) {
  for (auto& [observer, rules] : entries_) {
    for (auto& [rule_id, e] : rules) {
      for (const auto& t : tables) {
        if (t.rule_id == rule_id) e.score = t.at(e.mask);
      }
    }
  }
}

double SuspicionLedger::score(const std::string& observer, int rule_id) const {
  auto it = entries_.find(observer);
  if (it == entries_.end()) return 0.0;
  auto jt = it->second.find(rule_id);
  return jt == it->second.end() ? 0.0 : jt->second.score;
}

double SuspicionLedger::max_score(const std::string& observer) const {
  auto it = entries_.find(observer);
  if (it == entries_.end()) return 0.0;
  double best = 0.0;
  for (const auto& [_, e] : it->second) best = std::max(best, e.score);
  return best;
}

ActionMask SuspicionLedger::mask(const std::string& observer, int rule_id) const {
  auto it = entries_.find(observer);
  if (it == entries_.end()) return 0;
  auto jt = it->second.find(rule_id);
  return jt == it->second.end() ? 0 : jt->second.mask;
}

std::vector<std::string> classify_observers(const SuspicionLedger& ledger, const DetectionConfig& cfg) {
  std::vector<std::string> flagged;
  for (const auto& [observer, _] : ledger.entries()) {
    if (ledger.max_score(observer) > cfg.alarm_threshold) flagged.push_back(observer);
  }
  return flagged;
}

std::vector<RatePoint> fp_fn_sweep(const std::map<std::string, double>& scores,
                                   const std::map<std::string, bool>& malicious,
                                   std::span<const double> thresholds) {
  if (scores.size() != malicious.size()) {
    throw Error(ErrorCode::kDegeneratePopulation, "score and label maps differ in size");
  }
  std::size_t positives = 0;
  for (const auto& [id, bad] : malicious) {
    if (!scores.count(id)) throw Error(ErrorCode::kDegeneratePopulation, "no score for " + id);
    positives += bad ? 1 : 0;
  }
  const std::size_t negatives = malicious.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kDegeneratePopulation, "population needs both malicious and benign observers");
  }
  std::vector<RatePoint> curve;
  for (double th : thresholds) {
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (const auto& [id, bad] : malicious) {
      const bool flagged = scores.at(id) > th;
      if (flagged && !bad) ++fp;
      if (!flagged && bad) ++fn;
    }
    curve.push_back({th, static_cast<double>(fp) / static_cast<double>(negatives),
                     static_cast<double>(fn) / static_cast<double>(positives)});
  }
  return curve;
}

}  // namespace adaptleak
