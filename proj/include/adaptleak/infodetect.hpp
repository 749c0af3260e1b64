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
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptleak/core.hpp"
#include "adaptleak/registry.hpp"

namespace adaptleak {

/// Shannon entropy in bits, 0 log 0 = 0. Throws NotADistribution unless the
/// entries are non-negative and sum to 1 within 1e-9.
double entropy(std::span<const double> dist);

/// Empirical joint counts of (context symbol, action-level tuple).
class JointHistogram {
 public:
  void add(int context, std::span<const int> tuple, std::int64_t count = 1);
  void add(int context, std::initializer_list<int> tuple, std::int64_t count = 1) {
    add(context, std::span<const int>(tuple.begin(), tuple.size()), count);
  }

  std::int64_t total() const { return total_; }
  std::size_t cell_count() const { return cells_.size(); }

  /// Visits (context, tuple id, count) for every non-zero cell.
  template <typename F>
  void for_each_cell(F&& f) const {
    for (const auto& [key, n] : cells_) f(key.first, key.second, n);
  }
  std::map<int, std::int64_t> context_marginal() const;
  std::map<int, std::int64_t> tuple_marginal() const;

  /// Same joint with the roles of context and tuple exchanged.
  JointHistogram transposed() const;

 private:
  std::map<std::vector<int>, int> tuple_ids_;
  std::map<std::pair<int, int>, std::int64_t> cells_;
  std::int64_t total_ = 0;
};

/// Plug-in estimate of I(C;A) in bits. Throws EmptyHistogram when n = 0.
double mutual_information(const JointHistogram& joint);

/// I(C;A) / H(C), or 0 when H(C) = 0.
double normalized_mi(const JointHistogram& joint);

/// Histogram of (context, served tuple) over ticks, one sample per tick.
JointHistogram tick_histogram(std::span<const int> contexts, const ActionTimeline& served);

/// Distinct (context, full action vector) rows with multiplicities. This is
/// the sample basis every table entry is computed from.
class SampleCounts {
 public:
  explicit SampleCounts(std::size_t width = 0) : width_(width) {}

  void add(int context, std::span<const int> actions, std::int64_t count = 1);
  /// One sample per tick of series over [from, to).
  void add_series(const TickSeries& series, Tick from, Tick to);

  std::size_t width() const { return width_; }
  std::size_t distinct_rows() const { return counts_.size(); }
  std::int64_t total() const { return total_; }
  int context(std::size_t row) const { return keys_[row * (width_ + 1)]; }
  std::span<const int> actions(std::size_t row) const {
    return {keys_.data() + row * (width_ + 1) + 1, width_};
  }
  std::int64_t count(std::size_t row) const { return counts_[row]; }

 private:
  std::size_t width_;
  std::vector<int> keys_;  // context followed by the action vector, per row
  std::vector<std::int64_t> counts_;
  std::map<std::vector<int>, std::size_t> index_;
  std::int64_t total_ = 0;
  std::vector<int> scratch_;
  std::size_t last_row_ = static_cast<std::size_t>(-1);
};

/// Normalized MI of the context against the projection onto `mask`.
double subset_score(const SampleCounts& samples, ActionMask mask);

/// Recomputes every subset row of `table` from `samples`.
void update_mi_table(MITable& table, const SampleCounts& samples);

/// Recomputes each rule's table from its series (matched by rule id) over
/// all ticks.
void update_mi_tables(MITables& tables, std::span<const TickSeries> series);

struct DetectionConfig {
  double alarm_threshold = 0.65;
  Tick refresh_every = kTicksPerDay;
};

struct SuspicionEntry {
  ActionMask mask = 0;
  double score = 0.0;

  friend bool operator==(const SuspicionEntry&, const SuspicionEntry&) = default;
};

/// Per observer, per rule: the actions ever queried and the table entry for
/// that cumulative set. The score depends on which getters were called, not
/// how often.
class SuspicionLedger {
 public:
  /// Throws NotAProtectedGetter if `action` is not one of rule_id's actions.
  void note_observation(const std::string& observer, int rule_id, std::string_view action,
                        const MITables& tables);
  /// Re-reads every score from freshly updated tables.
  void refresh(const MITables& tables);

  double score(const std::string& observer, int rule_id) const;
  double max_score(const std::string& observer) const;
  ActionMask mask(const std::string& observer, int rule_id) const;

  const std::map<std::string, std::map<int, SuspicionEntry>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::map<int, SuspicionEntry>> entries_;
};

/// Observers whose highest per-rule score exceeds the alarm threshold, sorted.
std::vector<std::string> classify_observers(const SuspicionLedger& ledger, const DetectionConfig& cfg);

struct RatePoint {
  double threshold = 0.0;
  double false_positive = 0.0;
  double false_negative = 0.0;
};

/// FP = flagged benign / benign, FN = unflagged malicious / malicious, with
/// an observer flagged when its score exceeds the threshold. Throws
/// DegeneratePopulation unless both classes are present and the key sets
/// match.
std::vector<RatePoint> fp_fn_sweep(const std::map<std::string, double>& scores,
                                   const std::map<std::string, bool>& malicious,
                                   std::span<const double> thresholds);

}  // namespace adaptleak
