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

#include "adaptleak/harness.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adaptleak/error.hpp"
#include "adaptleak/trace_io.hpp"
#include "gtest/gtest.h"

namespace adaptleak {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("adaptleak_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_config(int days = 3) {
  return config_from_json(parse_json(R"({
    "days": )" + std::to_string(days) + R"(,
    "seed": 7,
    "observers": [{"id": "spy"}, {"id": "weather", "actions": ["MediaVolume"], "cadence": 30}],
    "mitigation": {"enabled": true, "initial_method": "FeatureMask"},
    "attack": {"restarts": 3}
  })", "test"));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ADAPTLEAK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ErrorCode config_error_of(const std::string& text) {
  try {
    ExperimentConfig cfg = config_from_json(parse_json(text, "test"));
    run_experiment(cfg);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << text;
  return ErrorCode::kMalformedDocument;
}

TEST(ConfigTest, RejectsBadConfigs) {
  EXPECT_EQ(config_error_of(R"({"dayz": 3})"), ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of(R"({"days": 0})"), ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of(R"({"days": 1, "observers": [{"id": "a", "actions": ["Torch"]}]})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of(R"({"days": 1, "observers": [{"id": "a"}, {"id": "a"}]})"), ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of(R"({"mitigation": {"initial_method": "Shuffle"}})"), ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of(R"({"scenario": {"preset": "car"}})"), ErrorCode::kConfigError);
  EXPECT_EQ(config_error_of("{"), ErrorCode::kConfigError);
}

TEST(ExperimentTest, FilesAreByteIdenticalAcrossRuns) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_experiment(run_experiment(small_config()), a.string());
  write_experiment(run_experiment(small_config()), b.string());
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    EXPECT_EQ(read_text_file(entry.path().string()), read_text_file((b / name).string())) << name;
    ++files;
  }
  EXPECT_EQ(files, 5u);
}

TEST(ExperimentTest, ResultsAlignWithWindows) {
  const ExperimentRun run = run_experiment(small_config());
  ASSERT_EQ(run.report.observers.size(), 2u);
  for (const auto& o : run.report.observers) {
    ASSERT_EQ(o.windows.size(), 3u);
    for (std::size_t w = 0; w < o.windows.size(); ++w) {
      EXPECT_EQ(o.windows[w].t_end, static_cast<Tick>(w + 1) * kTicksPerDay);
      for (double v : {o.windows[w].suspicion, o.windows[w].effective_mi, o.windows[w].accuracy}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
  std::istringstream csv(results_csv(run.report));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 1 + 2 * 3);
  // Flagged observers are served something other than the truth.
  EXPECT_TRUE(run.report.observers[0].flagged);
  EXPECT_NE(run.served[0], run.sim.series.actions);
}

TEST(ExperimentTest, UnmitigatedLeakAndEscalationCollapse) {
  ExperimentConfig plain = small_config(28);
  plain.mitigation.enabled = false;
  plain.observers.resize(1);
  const ExperimentRun open = run_experiment(plain);
  const ObserverResult& o = open.report.observers[0];
  EXPECT_GE(o.before.accuracy, o.before.baseline + 0.20);
  EXPECT_EQ(o.before, o.after);

  ExperimentConfig guarded = plain;
  guarded.mitigation.enabled = true;
  const ExperimentRun closed = run_experiment(guarded);
  const WindowResult& last = closed.report.observers[0].windows.back();
  EXPECT_NEAR(last.accuracy, last.baseline, 0.05);
  EXPECT_FALSE(closed.report.observers[0].history.empty());
}

TEST(ExperimentTest, FixedIdentityMethodLeavesReadsUntouched) {
  ExperimentConfig cfg = small_config(2);
  cfg.mitigation.fixed = MitigationMethod::suppression(1);
  cfg.mitigation.delay = false;
  const ExperimentRun run = run_experiment(cfg);
  EXPECT_EQ(run.served[0], run.sim.series.actions);
}

TEST(ReportTest, Summaries) {
  const ExperimentRun run = run_experiment(small_config(1));
  const std::string text = summarize_report(to_json(run.report).dump());
  EXPECT_NE(text.find("spy"), std::string::npos);
  EXPECT_NE(text.find("weather"), std::string::npos);

  Json empty = to_json(run.report);
  empty["observers"] = Json::array();
  EXPECT_NE(summarize_report(empty.dump()).find("no observers"), std::string::npos);

  for (const char* bad : {"{", "[]", R"({"observers": 3})"}) {
    try {
      summarize_report(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch) << bad;
    }
  }
}

TEST(SweepTest, EndpointsAndIdentityRows) {
  ExperimentConfig cfg = small_config(3);
  const auto ks = run_sweep(cfg, SweepAxis::kSuppressK, {1, 3});
  const auto ps = run_sweep(cfg, SweepAxis::kMaskP, {0.0, 1.0});
  // k = 1 and p = 0 are both the unmitigated run.
  EXPECT_EQ(*ks[0].effective_mi, *ps[0].effective_mi);
  EXPECT_EQ(*ks[0].accuracy, *ps[0].accuracy);
  const ExperimentRun open = [&] {
    ExperimentConfig c = cfg;
    c.mitigation.enabled = false;
    return run_experiment(c);
  }();
  EXPECT_DOUBLE_EQ(*ps[0].effective_mi, open.report.observers[0].effective_mi_before);
  EXPECT_NEAR(*ps[1].effective_mi, 0.0, 1e-9);
  EXPECT_FALSE(ps[0].false_positive.has_value());
}

TEST(SweepTest, ThresholdCurveIsMonotone) {
  ExperimentConfig cfg = small_config(7);
  const std::vector<double> th{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto rows = run_sweep(cfg, SweepAxis::kThreshold, th);
  ASSERT_EQ(rows.size(), th.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(*rows[i].false_positive, *rows[i - 1].false_positive);
    EXPECT_GE(*rows[i].false_negative, *rows[i - 1].false_negative);
  }
  EXPECT_EQ(*rows.back().false_positive, 0.0);
  EXPECT_EQ(*rows.back().false_negative, 1.0);
  const std::string csv = sweep_csv(SweepAxis::kThreshold, rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,effective_mi,accuracy,baseline,false_positive,false_negative");
}

TEST(SweepTest, WorkerCountDoesNotChangeResults) {
  ExperimentConfig cfg = small_config(2);
  cfg.sweep.seeds = 2;
  ::setenv("ADAPTLEAK_THREADS", "1", 1);
  const std::string one = sweep_csv(SweepAxis::kMaskP, run_sweep(cfg, SweepAxis::kMaskP, {0.0, 0.4, 0.8}));
  ::setenv("ADAPTLEAK_THREADS", "3", 1);
  EXPECT_EQ(sweep_threads(), 3u);
  const std::string three = sweep_csv(SweepAxis::kMaskP, run_sweep(cfg, SweepAxis::kMaskP, {0.0, 0.4, 0.8}));
  ::unsetenv("ADAPTLEAK_THREADS");
  EXPECT_EQ(one, three);
}

TEST(PopulationTest, SpansBothClasses) {
  ExperimentConfig cfg = small_config(7);
  cfg.population.size = 20;
  const ExperimentRun run = run_experiment(cfg);
  ASSERT_EQ(run.report.population.size(), 20u);
  int malicious = 0;
  for (const auto& m : run.report.population) {
    malicious += m.malicious;
    EXPECT_GE(m.actions.size(), 1u);
    EXPECT_LE(m.actions.size(), 4u);
  }
  EXPECT_GT(malicious, 0);
  EXPECT_LT(malicious, 20);
  EXPECT_FALSE(run.report.population_curve.empty());
}

// Attacking the persisted truth through the CLI gives the inline report.
TEST(CliTest, StageIsolation) {
  const fs::path dir = scratch("cli_stage");
  ASSERT_EQ(run_cli("simulate --seed 5 --days 2 --out " + dir.string()), 0);
  ASSERT_EQ(run_cli("attack --seed 5 --series " + (dir / "truth.csv").string() + " --out " +
                    (dir / "attack.json").string()),
            0);
  const Scenario sc = build_scenario({}, 5);
  const SimOutput sim = simulate(sc, 2, 5);
  EXPECT_EQ(read_text_file((dir / "truth.csv").string()), [&] {
    std::ostringstream s;
    write_series(s, sim.series);
    return s.str();
  }());
  const AttackReport inline_report = attack_pipeline(sim.series.actions, sim.series, 5);
  const AttackReport from_file =
      attack_report_from_json(parse_json(read_text_file((dir / "attack.json").string()), "attack"));
  // The file's alphabet is rediscovered in order of appearance, so compare
  // predicted symbols rather than indices.
  EXPECT_EQ(from_file.accuracy, inline_report.accuracy);
  EXPECT_EQ(from_file.baseline, inline_report.baseline);
  EXPECT_EQ(from_file.chosen_k, inline_report.chosen_k);
  EXPECT_EQ(from_file.dominant_features, inline_report.dominant_features);
  EXPECT_EQ(from_file.silhouette, inline_report.silhouette);
  ASSERT_EQ(from_file.predicted.size(), inline_report.predicted.size());
  for (std::size_t t = 0; t < from_file.predicted.size(); ++t) {
    ASSERT_EQ(from_file.alphabet[from_file.predicted[t]], inline_report.alphabet[inline_report.predicted[t]]) << t;
  }
}

TEST(CliTest, ExitCodes) {
  const fs::path dir = scratch("cli_exit");
  write_text_file((dir / "bad.json").string(), R"({"nonsense": 1})");
  write_text_file((dir / "corrupt.json").string(), "{\"observers\": [");
  EXPECT_EQ(run_cli("experiment --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("experiment --days 0"), 2);
  EXPECT_EQ(run_cli("sweep --axis sideways"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("report " + (dir / "corrupt.json").string()), 3);

  const ExperimentRun run = run_experiment(small_config(1));
  Json empty = to_json(run.report);
  empty["observers"] = Json::array();
  write_text_file((dir / "empty.json").string(), empty.dump());
  EXPECT_EQ(run_cli("report " + (dir / "empty.json").string()), 0);
}

TEST(CliTest, ExperimentWritesReport) {
  const fs::path dir = scratch("cli_experiment");
  write_text_file((dir / "cfg.json").string(), R"({"days": 2, "observers": [{"id": "spy"}]})");
  ASSERT_EQ(run_cli("experiment --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()), 0);
  for (const char* f : {"report.json", "results.csv", "trace.jsonl", "audit.jsonl", "truth.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_EQ(run_cli("report " + (dir / "out" / "report.json").string()), 0);
}

}  // namespace
}  // namespace adaptleak
