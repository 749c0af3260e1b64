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

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "adaptleak/error.hpp"
#include "gtest/gtest.h"

namespace adaptleak {
namespace {

// Direct summation over a dense joint probability grid.
double grid_mi(const std::vector<std::vector<double>>& p) {
  std::vector<double> row(p.size(), 0.0), col(p[0].size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      row[i] += p[i][j];
      col[j] += p[i][j];
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      if (p[i][j] > 0.0) mi += p[i][j] * std::log2(p[i][j] / (row[i] * col[j]));
    }
  }
  return mi;
}

double grid_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

// Normalized MI of contexts against the masked projection of rows, computed
// from scratch with string keys.
double brute_subset_mi(const std::vector<int>& ctx, const std::vector<std::vector<int>>& rows, ActionMask mask) {
  std::map<std::pair<int, std::string>, double> joint;
  std::map<int, double> pc;
  std::map<std::string, double> pa;
  const double n = static_cast<double>(ctx.size());
  for (std::size_t t = 0; t < ctx.size(); ++t) {
    std::string key;
    for (std::size_t a = 0; a < rows[t].size(); ++a) {
      if (mask & (1u << a)) key += std::to_string(rows[t][a]) + ",";
    }
    joint[{ctx[t], key}] += 1.0 / n;
    pc[ctx[t]] += 1.0 / n;
    pa[key] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [k, p] : joint) mi += p * std::log2(p / (pc[k.first] * pa[k.second]));
  double h = 0.0;
  for (const auto& [c, p] : pc) h -= p * std::log2(p);
  return h == 0.0 ? 0.0 : mi / h;
}

struct RandomSeries {
  std::vector<int> ctx;
  std::vector<std::vector<int>> rows;
  TickSeries series;
};

// Contexts follow a sticky chain; each action is a noisy function of the
// context with its own noise level, so subsets carry varied information.
RandomSeries random_series(std::mt19937_64& rng, int width, int contexts, int horizon) {
  RandomSeries r;
  std::vector<double> noise(static_cast<std::size_t>(width));
  for (auto& x : noise) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int c = 0;
  for (int a = 0; a < width; ++a) r.series.actions.names.push_back("A" + std::to_string(a));
  for (int t = 0; t < horizon; ++t) {
    if (u(rng) < 0.05) c = static_cast<int>(rng() % static_cast<unsigned>(contexts));
    std::vector<int> row;
    for (int a = 0; a < width; ++a) {
      row.push_back(u(rng) < noise[a] ? static_cast<int>(rng() % 3) : (c + a) % 3);
    }
    r.ctx.push_back(c);
    r.rows.push_back(row);
    r.series.context.push_back(r.series.intern("c" + std::to_string(c)));
    r.series.actions.levels.insert(r.series.actions.levels.end(), row.begin(), row.end());
  }
  // Interned indices follow first appearance; keep ctx consistent with them.
  r.ctx = r.series.context;
  return r;
}

MITable table_for(const TickSeries& s) {
  Registry reg;
  reg.rules.push_back({0, {"Context"}, s.actions.names});
  MITables tables = init_mi_tables(reg);
  update_mi_tables(tables, std::span<const TickSeries>(&s, 1));
  return tables.front();
}

TEST(EntropyTest, KnownValues) {
  EXPECT_DOUBLE_EQ(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 2.0);
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.9, 0.1}), -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1), 1e-15);
  EXPECT_NEAR(entropy(std::vector<double>{0.9, 0.1}), 0.4690, 1e-4);
}

TEST(EntropyTest, RejectsNonDistributions) {
  for (const std::vector<double>& bad : {std::vector<double>{0.5, 0.6}, std::vector<double>{1.5, -0.5}}) {
    try {
      entropy(bad);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNotADistribution);
    }
  }
}

TEST(MutualInformationTest, IndependentProductCounts) {
  const std::vector<std::int64_t> rows{3, 5, 2}, cols{4, 1, 6, 9};
  JointHistogram h;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) h.add(static_cast<int>(i), {static_cast<int>(j)}, rows[i] * cols[j]);
  }
  EXPECT_LE(std::abs(mutual_information(h)), 1e-12);
  EXPECT_LE(std::abs(normalized_mi(h)), 1e-12);
}

TEST(MutualInformationTest, PerfectlyDependentBinary) {
  JointHistogram h;
  h.add(0, {0}, 50);
  h.add(1, {1}, 50);
  EXPECT_EQ(mutual_information(h), 1.0);
  EXPECT_EQ(normalized_mi(h), 1.0);
}

TEST(MutualInformationTest, AgainstDirectSummation) {
  JointHistogram h;
  h.add(0, {0}, 40);
  h.add(0, {1}, 10);
  h.add(1, {0}, 10);
  h.add(1, {1}, 40);
  const double oracle = grid_mi({{0.4, 0.1}, {0.1, 0.4}});
  EXPECT_NEAR(mutual_information(h), oracle, 1e-12);
  EXPECT_NEAR(mutual_information(h), 0.278, 0.001);
}

TEST(MutualInformationTest, EmptyHistogram) {
  try {
    mutual_information(JointHistogram{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyHistogram);
  }
}

TEST(MutualInformationTest, SingleContextNormalizesToZero) {
  JointHistogram h;
  h.add(0, {0}, 3);
  h.add(0, {1}, 7);
  EXPECT_EQ(normalized_mi(h), 0.0);
}

TEST(MutualInformationTest, SymmetryBoundAndNonNegativity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    JointHistogram h;
    const int nc = 1 + static_cast<int>(rng() % 5), na = 1 + static_cast<int>(rng() % 5);
    std::vector<std::vector<double>> grid(nc, std::vector<double>(na, 0.0));
    double n = 0.0;
    for (int c = 0; c < nc; ++c) {
      for (int a = 0; a < na; ++a) {
        const auto k = static_cast<std::int64_t>(rng() % 20);
        if (k == 0) continue;
        h.add(c, {a}, k);
        grid[c][a] = static_cast<double>(k);
        n += static_cast<double>(k);
      }
    }
    if (n == 0.0) continue;
    std::vector<double> pc(nc, 0.0), pa(na, 0.0);
    for (int c = 0; c < nc; ++c) {
      for (int a = 0; a < na; ++a) {
        grid[c][a] /= n;
        pc[c] += grid[c][a];
        pa[a] += grid[c][a];
      }
    }
    const double mi = mutual_information(h);
    EXPECT_GE(mi, 0.0);
    EXPECT_NEAR(mi, mutual_information(h.transposed()), 1e-12);
    EXPECT_LE(mi, std::min(grid_entropy(pc), grid_entropy(pa)) + 1e-9);
    EXPECT_NEAR(mi, grid_mi(grid), 1e-9);
  }
}

// Sampled joints converge on the planted value.
TEST(MutualInformationTest, ConvergesOnPlantedJoints) {
  std::mt19937_64 rng(17);
  for (int planted = 0; planted < 5; ++planted) {
    const int nc = 2 + planted % 3, na = 2 + (planted + 1) % 3;
    std::vector<std::vector<double>> p(nc, std::vector<double>(na));
    std::vector<double> flat;
    double sum = 0.0;
    for (auto& row : p) {
      for (auto& x : row) {
        x = 0.05 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        sum += x;
      }
    }
    // A heavy diagonal so the joint carries real information.
    for (int i = 0; i < std::min(nc, na); ++i) {
      p[i][i] += 1.0;
      sum += 1.0;
    }
    std::vector<double> pc(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
      for (int a = 0; a < na; ++a) {
        p[c][a] /= sum;
        pc[c] += p[c][a];
        flat.push_back(p[c][a]);
      }
    }
    const double truth = grid_mi(p) / grid_entropy(pc);
    std::discrete_distribution<int> draw(flat.begin(), flat.end());
    JointHistogram h;
    for (int i = 0; i < 20000; ++i) {
      const int cell = draw(rng);
      h.add(cell / na, {cell % na});
    }
    EXPECT_NEAR(normalized_mi(h), truth, 0.02) << "joint " << planted;
  }
}

TEST(MiTableTest, MatchesBruteForcePerSubset) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomSeries r = random_series(rng, 4, 2 + trial % 4, 600);
    const MITable table = table_for(r.series);
    ASSERT_EQ(table.row_count(), 15u);
    EXPECT_EQ(table.at(0), 0.0);
    for (ActionMask m = 1; m <= 15; ++m) {
      EXPECT_NEAR(table.at(m), brute_subset_mi(r.ctx, r.rows, m), 1e-9) << "mask " << m;
    }
  }
}

TEST(MiTableTest, SubsetMonotonicity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int width = 1 + static_cast<int>(rng() % 4);
    const RandomSeries r = random_series(rng, width, 2 + static_cast<int>(rng() % 5), 500);
    const MITable table = table_for(r.series);
    for (ActionMask s = 1; s <= table.full_mask(); ++s) {
      EXPECT_GE(table.at(s), 0.0);
      EXPECT_LE(table.at(s), 1.0 + 1e-12);
      for (ActionMask t = s; t <= table.full_mask(); ++t) {
        if ((s & t) == s) EXPECT_LE(table.at(s), table.at(t) + 1e-9);
      }
    }
  }
}

TEST(MiTableTest, PerfectChannelAndConstantAction) {
  TickSeries s;
  s.actions.names = {"Ringer", "Constant"};
  for (int t = 0; t < 100; ++t) {
    const int c = (t / 10) % 2;
    s.context.push_back(s.intern(c ? "work" : "home"));
    s.actions.levels.push_back(c * 2);
    s.actions.levels.push_back(4);
  }
  const MITable table = table_for(s);
  EXPECT_DOUBLE_EQ(table.at(0b01), 1.0);
  EXPECT_DOUBLE_EQ(table.at(0b11), 1.0);
  EXPECT_EQ(table.at(0b10), 0.0);
}

MITables ledger_tables() {
  MITable t;
  t.rule_id = 0;
  t.actions = {"A", "B", "C"};
  t.values = {0.0, 0.3, 0.2, 0.5, 0.1, 0.35, 0.25, 0.9};
  return {t};
}

TEST(SuspicionLedgerTest, CumulativeMask) {
  const MITables tables = ledger_tables();
  SuspicionLedger ledger;
  ledger.note_observation("app", 0, "A", tables);
  EXPECT_EQ(ledger.score("app", 0), 0.3);
  ledger.note_observation("app", 0, "B", tables);
  EXPECT_EQ(ledger.mask("app", 0), 0b011u);
  EXPECT_EQ(ledger.score("app", 0), 0.5);
  ledger.note_observation("app", 0, "A", tables);
  EXPECT_EQ(ledger.score("app", 0), 0.5);
  EXPECT_EQ(ledger.score("other", 0), 0.0);
}

TEST(SuspicionLedgerTest, QueryRateDoesNotMatter) {
  const MITables tables = ledger_tables();
  SuspicionLedger ledger;
  ledger.note_observation("slow", 0, "A", tables);
  ledger.note_observation("slow", 0, "C", tables);
  for (int i = 0; i < 10000; ++i) ledger.note_observation("fast", 0, i % 2 ? "A" : "C", tables);
  EXPECT_EQ(ledger.entries().at("slow"), ledger.entries().at("fast"));
}

TEST(SuspicionLedgerTest, RefreshReReadsScores) {
  MITables tables = ledger_tables();
  SuspicionLedger ledger;
  ledger.note_observation("app", 0, "C", tables);
  tables[0].values[0b100] = 0.7;
  ledger.refresh(tables);
  EXPECT_EQ(ledger.score("app", 0), 0.7);
}

TEST(SuspicionLedgerTest, UnprotectedGetter) {
  SuspicionLedger ledger;
  try {
    ledger.note_observation("app", 0, "Torch", ledger_tables());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAProtectedGetter);
  }
}

TEST(ClassifyTest, Thresholds) {
  MITables tables = ledger_tables();
  tables[0].values[0b001] = 0.97;
  tables[0].values[0b010] = 0.40;
  SuspicionLedger ledger;
  ledger.note_observation("A", 0, "A", tables);
  ledger.note_observation("B", 0, "B", tables);
  EXPECT_EQ(classify_observers(ledger, {0.65}), (std::vector<std::string>{"A"}));
  EXPECT_TRUE(classify_observers(ledger, {1.0}).empty());
  EXPECT_EQ(classify_observers(ledger, {0.0}).size(), 2u);
}

TEST(FpFnSweepTest, EndpointsAndMonotonicity) {
  std::mt19937_64 rng(2);
  std::map<std::string, double> scores;
  std::map<std::string, bool> malicious;
  for (int i = 0; i < 30; ++i) {
    const std::string id = "o" + std::to_string(i);
    scores[id] = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    malicious[id] = i % 3 == 0;
  }
  std::vector<double> thresholds;
  for (int i = 0; i <= 100; ++i) thresholds.push_back(i / 100.0);
  const auto curve = fp_fn_sweep(scores, malicious, thresholds);
  ASSERT_EQ(curve.size(), thresholds.size());
  EXPECT_EQ(curve.front().false_positive, 1.0);
  EXPECT_EQ(curve.front().false_negative, 0.0);
  EXPECT_EQ(curve.back().false_positive, 0.0);
  EXPECT_EQ(curve.back().false_negative, 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].false_positive, curve[i - 1].false_positive);
    EXPECT_GE(curve[i].false_negative, curve[i - 1].false_negative);
  }
}

TEST(FpFnSweepTest, DegeneratePopulation) {
  const std::vector<double> th{0.5};
  EXPECT_THROW(fp_fn_sweep({{"a", 0.1}}, {{"a", true}}, th), Error);
  EXPECT_THROW(fp_fn_sweep({{"a", 0.1}, {"b", 0.2}}, {{"a", true}, {"c", false}}, th), Error);
}

}  // namespace
}  // namespace adaptleak
