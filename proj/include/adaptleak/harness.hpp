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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptleak/attacker.hpp"
#include "adaptleak/infodetect.hpp"
#include "adaptleak/json_io.hpp"
#include "adaptleak/mitigation.hpp"
#include "adaptleak/scenario.hpp"

namespace adaptleak {

struct ObserverSpec {
  std::string id;
  std::vector<std::string> actions;  // empty means every action of the rule
  Tick cadence = 1;                  // ticks between polls
};

struct ScenarioSpec {
  std::string preset = "phone";  // phone | smart_home
  int profiles = 5;
  std::optional<double> override_rate;
  std::optional<Json> inline_scenario;  // replaces the preset when present
};

Scenario build_scenario(const ScenarioSpec& spec, std::uint64_t seed);

struct MitigationConfig {
  bool enabled = false;
  bool auto_consent = true;  // stands in for asking the user
  MethodKind initial_method = MethodKind::kSuppression;
  /// When set, every observer is served through this method from t = 0 and
  /// the controller stays idle.
  std::optional<MitigationMethod> fixed;
  bool delay = true;
  Ladder ladder;
};

struct PopulationConfig {
  int size = 0;
  int max_subset = 4;
  /// Malicious means attack accuracy above baseline by more than this.
  double malicious_margin = 0.02;
};

struct SweepConfig {
  std::vector<double> thresholds{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                                 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0};
  std::vector<double> mask_ps{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<int> suppress_ks{1, 2, 3, 5, 8};
  MethodKind mask_method = MethodKind::kFeatureMask;
  int seeds = 1;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  int days = 28;
  std::uint64_t seed = 1;
  std::vector<ObserverSpec> observers;
  DetectionConfig detection;
  MitigationConfig mitigation;
  AttackOptions attack;
  PopulationConfig population;
  SweepConfig sweep;
};

/// Strict: unknown keys raise ConfigError.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::string& path);

/// Fills empty observer action lists and throws ConfigError unless days >= 1,
/// every observer id is unique and every queried action belongs to the
/// simulated rule.
void resolve_observers(ExperimentConfig& cfg, const Scenario& sc);

struct WindowResult {
  int window = 0;
  Tick t_end = 0;
  double suspicion = 0.0;
  double effective_mi = 0.0;
  double accuracy = 0.0;
  double baseline = 0.0;
  MitigationMethod method;
  Tick delay = 0;
};

struct ObserverResult {
  std::string id;
  std::vector<std::string> actions;
  Tick cadence = 1;
  AttackReport before;  // on the true values of the queried actions
  AttackReport after;   // on what was actually served
  double effective_mi_before = 0.0;
  double effective_mi_after = 0.0;
  double final_suspicion = 0.0;
  bool flagged = false;
  std::vector<WindowResult> windows;
  std::vector<AuditEvent> history;  // escalate | switch | exhausted
};

struct PopulationMember {
  std::string id;
  std::vector<std::string> actions;
  double score = 0.0;
  double accuracy = 0.0;
  double baseline = 0.0;
  bool malicious = false;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::string scenario;
  int days = 0;
  std::uint64_t seed = 0;
  double alarm_threshold = 0.0;
  std::vector<ObserverResult> observers;
  std::vector<PopulationMember> population;
  std::vector<RatePoint> population_curve;
  /// Wall-clock per stage. Never written to files so that they stay
  /// byte-identical across runs.
  std::vector<StageTiming> timings;
};

struct ExperimentRun {
  ExperimentReport report;
  Registry registry;
  SimOutput sim;
  std::vector<AuditEvent> audit;
  std::vector<ActionTimeline> served;  // per observer, per tick
};

/// Simulate, mediate every observer read tick by tick, score, attack and
/// (optionally) mitigate. Deterministic in cfg.seed.
ExperimentRun run_experiment(ExperimentConfig cfg);

/// Writes report.json, results.csv, trace.jsonl, audit.jsonl and truth.csv.
void write_experiment(const ExperimentRun& run, const std::string& out_dir);

Json to_json(const ExperimentReport& report);
std::string results_csv(const ExperimentReport& report);

/// Synthetic observers querying 1..max_subset random actions each. When
/// per-action singleton scores are given, odd members draw only from the
/// less informative half of the actions so the population spans both
/// harmless and leaking subsets.
std::vector<ObserverSpec> synthetic_population(const AdaptationRule& rule, const PopulationConfig& pop,
                                               std::uint64_t seed, std::span<const double> singleton_scores = {});

/// Scores each member against the full-horizon table and labels it by its
/// unmitigated attack accuracy.
std::vector<PopulationMember> evaluate_population(const SimOutput& sim, const Scenario& sc,
                                                  const std::vector<ObserverSpec>& members,
                                                  const AttackOptions& attack, double malicious_margin,
                                                  std::uint64_t seed);

enum class SweepAxis { kThreshold, kMaskP, kSuppressK };

SweepAxis sweep_axis_from_string(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  std::optional<double> effective_mi;
  std::optional<double> accuracy;
  std::optional<double> baseline;
  std::optional<double> false_positive;
  std::optional<double> false_negative;
};

/// One independent seeded run per axis value (averaged over sweep.seeds),
/// spread over ADAPTLEAK_THREADS workers. Mask and suppression points serve
/// the first observer through the fixed method, without delay.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

/// Worker count from ADAPTLEAK_THREADS, default 1.
unsigned sweep_threads();

/// Human-readable summary of a report.json document. Throws SchemaMismatch.
std::string summarize_report(std::string_view report_json);

}  // namespace adaptleak
