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

#include "adaptleak/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "adaptleak/error.hpp"
#include "adaptleak/harness.hpp"
#include "adaptleak/scenario.hpp"
#include "gtest/gtest.h"

namespace adaptleak {
namespace {

FeatureMatrix column(const std::vector<double>& xs) { return make_matrix(xs.size(), 1, xs); }

double sq(double x) { return x * x; }

double dist(const FeatureMatrix& x, std::size_t i, std::size_t j) {
  double d = 0.0;
  for (std::size_t c = 0; c < x.cols; ++c) d += sq(x.at(i, c) - x.at(j, c));
  return std::sqrt(d);
}

// Textbook silhouette over all row pairs.
double naive_silhouette(const FeatureMatrix& x, const std::vector<int>& labels) {
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<int> n(k, 0);
    for (std::size_t j = 0; j < x.rows; ++j) {
      if (j == i) continue;
      sum[labels[j]] += dist(x, i, j);
      ++n[labels[j]];
    }
    if (n[labels[i]] == 0) continue;  // alone in its cluster
    const double a = sum[labels[i]] / n[labels[i]];
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != labels[i] && n[c] > 0) b = std::min(b, sum[c] / n[c]);
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(x.rows);
}

double inertia_of(const FeatureMatrix& x, const std::vector<int>& labels, int k) {
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> mean(x.cols, 0.0);
    int n = 0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (labels[r] != c) continue;
      ++n;
      for (std::size_t j = 0; j < x.cols; ++j) mean[j] += x.at(r, j);
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    for (auto& m : mean) m /= n;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (labels[r] != c) continue;
      for (std::size_t j = 0; j < x.cols; ++j) total += sq(x.at(r, j) - mean[j]);
    }
  }
  return total;
}

// Minimum inertia over every assignment of rows to k non-empty clusters.
double brute_force_inertia(const FeatureMatrix& x, int k) {
  std::vector<int> labels(x.rows, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    best = std::min(best, inertia_of(x, labels, k));
    std::size_t i = 0;
    while (i < labels.size() && ++labels[i] == k) labels[i++] = 0;
    if (i == labels.size()) break;
  }
  return best;
}

TickSeries truth_of(const std::vector<int>& ctx, int symbols) {
  TickSeries s;
  for (int c = 0; c < symbols; ++c) s.alphabet.push_back("c" + std::to_string(c));
  s.context = ctx;
  s.actions.names = {"X"};
  s.actions.levels.assign(ctx.size(), 0);
  return s;
}

ClusterModel model_of(const std::vector<int>& labels, int k) {
  ClusterModel m;
  m.k = k;
  m.assignments = labels;
  return m;
}

TEST(KMeansTest, RecoversSeparatedBlobs) {
  const FeatureMatrix x = column({0.0, 0.1, 0.05, 0.02, 5.0, 5.1, 4.9, 5.05});
  const ClusterModel m = kmeans(x, 2, 1, 5);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(m.assignments[i], m.assignments[0]);
  for (int i = 5; i < 8; ++i) EXPECT_EQ(m.assignments[i], m.assignments[4]);
  EXPECT_NE(m.assignments[0], m.assignments[4]);
}

TEST(KMeansTest, IdenticalRowsRepairEmptyCluster) {
  const ClusterModel m = kmeans(column(std::vector<double>(10, 0.5)), 2, 3, 3);
  EXPECT_EQ(m.k, 2);
  EXPECT_EQ(m.inertia, 0.0);
  EXPECT_EQ(std::count(m.assignments.begin(), m.assignments.end(), 0) > 0, true);
  EXPECT_EQ(std::count(m.assignments.begin(), m.assignments.end(), 1) > 0, true);
}

TEST(KMeansTest, TooFewRows) {
  try {
    kmeans(column({1.0, 2.0}), 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRows);
  }
}

TEST(KMeansTest, NearExhaustiveOptimum) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> data;
    for (int i = 0; i < 16; ++i) data.push_back(u(rng));
    const FeatureMatrix x = make_matrix(8, 2, data);
    const ClusterModel m = kmeans(x, 3, static_cast<std::uint64_t>(trial), 50);
    EXPECT_NEAR(m.inertia, inertia_of(x, m.assignments, 3), 1e-9);
    EXPECT_LE(m.inertia, 1.05 * brute_force_inertia(x, 3) + 1e-12);
  }
}

TEST(KMeansTest, InertiaTraceNonIncreasingAndDeterministic) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> data;
  for (int i = 0; i < 600; ++i) data.push_back(g(rng) + (i % 3) * 2.0);
  const FeatureMatrix x = make_matrix(200, 3, data);
  const ClusterModel a = kmeans(x, 4, 9, 4);
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) {
    EXPECT_LE(a.inertia_trace[i], a.inertia_trace[i - 1] + 1e-9);
  }
  const ClusterModel b = kmeans(x, 4, 9, 4);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(SilhouetteTest, FourPointOracle) {
  const FeatureMatrix x = column({0.0, 1.0, 10.0, 11.0});
  const std::vector<int> labels{0, 0, 1, 1};
  // a = 1 for every point; b is the mean distance to the far pair.
  const double expected = ((10.5 - 1.0) / 10.5 + (9.5 - 1.0) / 9.5) / 2.0;
  EXPECT_NEAR(silhouette(x, labels), expected, 1e-12);
  EXPECT_NEAR(silhouette(x, labels), 0.900, 0.001);
}

TEST(SilhouetteTest, InterleavedAndDegenerate) {
  EXPECT_LE(silhouette(column({0.0, 0.0, 1.0, 1.0}), std::vector<int>{0, 1, 0, 1}), 0.0);
  EXPECT_EQ(silhouette(column({2.0, 2.0, 2.0}), std::vector<int>{0, 1, 1}), 0.0);
  try {
    silhouette(column({0.0, 1.0}), std::vector<int>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleCluster);
  }
}

// Rows are collapsed to weighted distinct points internally; the result must
// match the pairwise definition on data full of duplicates.
TEST(SilhouetteTest, MatchesPairwiseDefinitionWithDuplicates) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 30;
    std::vector<double> data;
    std::vector<int> labels;
    for (std::size_t r = 0; r < rows; ++r) {
      data.push_back(static_cast<double>(rng() % 3));
      data.push_back(static_cast<double>(rng() % 2));
      labels.push_back(static_cast<int>(rng() % 3));
    }
    labels[0] = 0;
    labels[1] = 1;
    labels[2] = 2;
    const FeatureMatrix x = make_matrix(rows, 2, data);
    EXPECT_NEAR(silhouette(x, labels), naive_silhouette(x, labels), 1e-9) << trial;
  }
}

FeatureMatrix profiles_matrix(int profiles, int per_profile, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<double> data;
  for (int p = 0; p < profiles; ++p) {
    for (int i = 0; i < per_profile; ++i) {
      data.push_back(p * 1.0 + g(rng));
      data.push_back((p % 2) * 3.0 + g(rng));
    }
  }
  return make_matrix(static_cast<std::size_t>(profiles * per_profile), 2, data);
}

TEST(SelectKTest, RecoversProfileCount) {
  EXPECT_EQ(select_k(profiles_matrix(3, 20, 1), 1).model.k, 3);
  EXPECT_EQ(select_k(profiles_matrix(2, 20, 2), 1).model.k, 2);
  EXPECT_EQ(select_k(column(std::vector<double>(12, 0.3)), 1).model.k, 2);
}

TEST(SelectKTest, WinnerDominatesEveryK) {
  const KSelection sel = select_k(profiles_matrix(4, 10, 3), 5);
  ASSERT_EQ(sel.per_k.size(), 6u);
  for (double s : sel.per_k) EXPECT_GE(sel.silhouette, s);
  EXPECT_EQ(sel.per_k[static_cast<std::size_t>(sel.model.k - kMinClusters)], sel.silhouette);
}

TEST(SelectKTest, TooFewRows) {
  EXPECT_THROW(select_k(column({0, 1, 2, 3, 4, 5}), 1), Error);
}

TEST(GreedySelectionTest, PicksTheDiscriminatingFeature) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data;
  const std::size_t rows = 90;
  for (std::size_t r = 0; r < rows; ++r) {
    data.push_back(u(rng));
    data.push_back(static_cast<double>(r % 3) / 2.0);
    data.push_back(u(rng));
  }
  const FeatureSelection fs = greedy_feature_selection(make_matrix(rows, 3, data), 1);
  EXPECT_EQ(fs.features, (std::vector<std::size_t>{1}));
}

TEST(GreedySelectionTest, DuplicateColumnsAddNothing) {
  std::vector<double> data;
  for (int r = 0; r < 40; ++r) {
    const double v = static_cast<double>(r % 4) / 3.0;
    data.insert(data.end(), {v, v, v});
  }
  EXPECT_EQ(greedy_feature_selection(make_matrix(40, 3, data), 1).features.size(), 1u);
}

TEST(MappingTest, ExactAndSingleCluster) {
  const std::vector<int> ctx{0, 0, 1, 1, 2, 2, 2, 0, 0, 0};
  const TickSeries truth = truth_of(ctx, 3);
  EXPECT_EQ(map_clusters_accuracy(model_of(ctx, 3), truth).accuracy, 1.0);
  const ClusterMapping single = map_clusters_accuracy(model_of(std::vector<int>(ctx.size(), 0), 1), truth);
  EXPECT_EQ(single.accuracy, baseline_accuracy(truth));
  EXPECT_THROW(map_clusters_accuracy(model_of({0, 1}, 2), truth), Error);
}

TEST(MappingTest, MajorityBeatsEveryOneToOneMatching) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 4, contexts = 5;
    std::vector<int> ctx, labels;
    for (int t = 0; t < 40; ++t) {
      ctx.push_back(static_cast<int>(rng() % contexts));
      labels.push_back(t < k ? t : static_cast<int>(rng() % static_cast<unsigned>(k)));
    }
    const double majority = map_clusters_accuracy(model_of(labels, k), truth_of(ctx, contexts)).accuracy;
    // Every injective cluster -> context labelling.
    std::vector<int> perm(contexts);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
      int hit = 0;
      for (std::size_t t = 0; t < ctx.size(); ++t) hit += perm[labels[t]] == ctx[t];
      best = std::max(best, hit / 40.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_GE(majority + 1e-12, best);
  }
}

TEST(BaselineTest, MajorityFrequency) {
  std::vector<int> ctx(100, 0);
  std::fill(ctx.begin() + 60, ctx.end(), 1);
  EXPECT_DOUBLE_EQ(baseline_accuracy(truth_of(ctx, 2)), 0.6);
  std::vector<int> uniform;
  for (int i = 0; i < 100; ++i) uniform.push_back(i % 4);
  EXPECT_DOUBLE_EQ(baseline_accuracy(truth_of(uniform, 4)), 0.25);
}

SimOutput phone_sim(int profiles, std::uint64_t seed, double override_rate, int days = 14) {
  ScenarioSpec spec;
  spec.profiles = profiles;
  spec.override_rate = override_rate;
  return simulate(build_scenario(spec, seed), days, seed);
}

TEST(AttackPipelineTest, PerfectSideChannel) {
  const SimOutput sim = phone_sim(5, 1, 0.0);
  const AttackReport r = attack_pipeline(sim.series.actions, sim.series, 1);
  EXPECT_GE(r.accuracy, 0.95);
  EXPECT_GE(r.chosen_k, kMinClusters);
  EXPECT_LE(r.chosen_k, kMaxClusters);
  EXPECT_EQ(r, attack_pipeline(sim.series.actions, sim.series, 1));
}

TEST(AttackPipelineTest, FullyMaskedFallsToBaseline) {
  const SimOutput sim = phone_sim(5, 2, 0.2);
  ActionTimeline zeros = sim.series.actions;
  std::fill(zeros.levels.begin(), zeros.levels.end(), 0);
  const AttackReport r = attack_pipeline(zeros, sim.series, 2);
  EXPECT_NEAR(r.accuracy, r.baseline, 0.02);
}

TEST(AttackPipelineTest, RingerModeIsDominant) {
  const SimOutput sim = phone_sim(3, 1, 0.2);
  const AttackReport r = attack_pipeline(sim.series.actions, sim.series, 1);
  EXPECT_NE(std::find(r.dominant_features.begin(), r.dominant_features.end(), "RingerMode"),
            r.dominant_features.end());
}

TEST(AttackPipelineTest, ScalingInvarianceAndBaselineFloor) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SimOutput sim = phone_sim(4, seed, 0.2, 7);
    AttackOptions opts;
    opts.restarts = 4;
    const AttackReport r = attack_pipeline(sim.series.actions, sim.series, seed, opts);
    EXPECT_GE(r.accuracy, r.baseline - 0.02);
    ActionTimeline scaled = sim.series.actions;
    for (std::size_t i = 0; i < scaled.levels.size(); i += scaled.width()) scaled.levels[i] *= 7;
    EXPECT_EQ(attack_pipeline(scaled, sim.series, seed, opts), r);
  }
}

TEST(FeatureMatrixTest, MinMaxAndCalendarColumns) {
  ActionTimeline tl{{"A", "B"}, {0, 5, 10, 5, 5, 5}};
  FeatureOptions opts;
  opts.time_of_day = true;
  opts.day_of_week = true;
  opts.start_tick = kTicksPerDay * 6 + 720;
  const FeatureMatrix x = build_feature_matrix(tl, opts);
  ASSERT_EQ(x.cols, 4u);
  EXPECT_EQ(x.at(0, 0), 0.0);
  EXPECT_EQ(x.at(1, 0), 1.0);
  EXPECT_EQ(x.at(2, 0), 0.5);
  EXPECT_EQ(x.at(1, 1), 0.0);  // constant column
  EXPECT_EQ(x.at(0, 2), 0.5);
  EXPECT_EQ(x.at(0, 3), 1.0);
}

}  // namespace
}  // namespace adaptleak
