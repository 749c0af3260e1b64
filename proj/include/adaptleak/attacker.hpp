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
#include <span>
#include <string>
#include <vector>

#include "adaptleak/core.hpp"

namespace adaptleak {

/// One row per tick, columns scaled to [0, 1].
struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  /// Keeps the given columns, in order.
  FeatureMatrix select(std::span<const std::size_t> columns) const;
};

/// Builds a matrix from raw rows (no scaling), mostly for tests.
FeatureMatrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                          std::vector<std::string> names = {});

struct FeatureOptions {
  bool time_of_day = false;
  bool day_of_week = false;
  Tick time_resolution = 60;  // minutes per time-of-day step
  Tick start_tick = 0;        // absolute tick of row 0
};

/// Min-max scales each observed action column (a constant column becomes 0)
/// and appends the optional calendar columns.
FeatureMatrix build_feature_matrix(const ActionTimeline& observed, const FeatureOptions& opts = {});

inline constexpr int kMinClusters = 2;
inline constexpr int kMaxClusters = 7;

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;  // per row
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

/// Lloyd's algorithm with k-means++ seeding; best inertia over `restarts`
/// (ties to the earliest restart). Deterministic in seed. Empty clusters are
/// reseeded at the point farthest from its centroid. Throws TooFewRows when
/// rows < k.
ClusterModel kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int restarts = 10);

/// Mean silhouette over rows; rows alone in their cluster score 0 and
/// a = b = 0 scores 0. Throws SingleCluster when fewer than two clusters are
/// populated.
double silhouette(const FeatureMatrix& x, std::span<const int> assignments);

struct KSelection {
  ClusterModel model;
  double silhouette = 0.0;
  std::vector<double> per_k;  // silhouette for k = 2..7
};

/// Runs kmeans for k = 2..7 and keeps the highest silhouette, ties to the
/// smaller k. Throws TooFewRows when rows < 7.
KSelection select_k(const FeatureMatrix& x, std::uint64_t seed, int restarts = 10);

struct FeatureSelection {
  std::vector<std::size_t> features;  // in order of admission
  double silhouette = 0.0;
  KSelection clustering;
};

/// Greedy forward selection: starting from the empty set with score -inf,
/// admit the feature whose select_k silhouette is highest (ties to the lower
/// column) while that silhouette beats the previous round.
FeatureSelection greedy_feature_selection(const FeatureMatrix& x, std::uint64_t seed, int restarts = 10);

struct ClusterMapping {
  std::vector<int> cluster_label;  // context index per cluster
  std::vector<int> predicted;      // context index per tick
  double accuracy = 0.0;
};

/// Labels each cluster with its majority true context (ties to the lower
/// context index) and scores the per-tick match.
ClusterMapping map_clusters_accuracy(const ClusterModel& model, const TickSeries& truth);

/// Frequency of the most common context.
double baseline_accuracy(const TickSeries& truth);

struct AttackOptions {
  bool feature_selection = true;
  int restarts = 10;
  FeatureOptions features;
};

struct AttackReport {
  std::vector<std::string> alphabet;
  std::vector<int> predicted;  // index into alphabet, per tick
  double accuracy = 0.0;
  double baseline = 0.0;
  std::vector<std::string> dominant_features;
  int chosen_k = 0;
  double silhouette = 0.0;

  friend bool operator==(const AttackReport&, const AttackReport&) = default;
};

/// Feature matrix -> (greedy selection | all features) -> select_k ->
/// majority mapping. Observations must span the truth horizon.
AttackReport attack_pipeline(const ActionTimeline& observed, const TickSeries& truth, std::uint64_t seed,
                             const AttackOptions& opts = {});

}  // namespace adaptleak
