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

// Command-line front end. Every stage reads and writes the library's file
// formats, so `simulate | attack | detect | mitigate` can run separately or
// all at once through `experiment`.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptleak/attacker.hpp"
#include "adaptleak/error.hpp"
#include "adaptleak/harness.hpp"
#include "adaptleak/infodetect.hpp"
#include "adaptleak/json_io.hpp"
#include "adaptleak/mitigation.hpp"
#include "adaptleak/scenario.hpp"
#include "adaptleak/trace_io.hpp"

namespace {

using namespace adaptleak;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  for (const auto& item : split_list(csv)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfigError, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kConfigError, "--values needs at least one number");
  return out;
}

// Registry for a persisted series: one rule over the series' action columns.
Registry registry_for(const TickSeries& series) {
  Registry reg;
  AdaptationRule rule;
  rule.id = series.rule;
  rule.contexts = {"Context"};
  rule.actions = series.actions.names;
  reg.rules.push_back(rule);
  return reg;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> days;
  std::string out;
};

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.days) cfg.days = *c.days;
  if (cfg.days < 1) throw Error(ErrorCode::kConfigError, "--days must be >= 1");
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = resolve_config(c);
  const Scenario sc = build_scenario(cfg.scenario, cfg.seed);
  const SimOutput sim = simulate(sc, cfg.days, cfg.seed);
  ensure_dir(c.out);
  write_text_file(join(c.out, "registry.xml"), serialize_registry(sc.registry));
  write_text_file(join(c.out, "scenario.json"), to_json(sc).dump(2) + "\n");
  save_records(join(c.out, "trace.jsonl"), sim.log, sc.registry);
  save_series(join(c.out, "truth.csv"), sim.series);
  std::cout << sim.log.size() << " adaptations, " << sim.overrides.size() << " overrides over "
            << sim.series.horizon() << " ticks\n";
  return 0;
}

struct AttackArgs {
  std::string series;
  std::string observed;
  std::string actions;
  bool no_selection = false;
  int restarts = 10;
};

int cmd_attack(const Common& c, const AttackArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const TickSeries truth = load_series(a.series);
  ActionTimeline observed = a.observed.empty() ? truth.actions : load_timeline(a.observed);
  if (!a.actions.empty()) observed = project(observed, split_list(a.actions));
  AttackOptions opts = cfg.attack;
  if (a.no_selection) opts.feature_selection = false;
  opts.restarts = a.restarts;
  const AttackReport r = attack_pipeline(observed, truth, cfg.seed, opts);
  if (!c.out.empty()) write_text_file(c.out, to_json(r).dump(2) + "\n");
  std::cout << "accuracy " << r.accuracy << " baseline " << r.baseline << " k " << r.chosen_k << " features";
  for (const auto& f : r.dominant_features) std::cout << ' ' << f;
  std::cout << '\n';
  return 0;
}

int cmd_detect(const Common& c, const std::string& series_path) {
  ExperimentConfig cfg = resolve_config(c);
  const TickSeries truth = load_series(series_path);
  const Registry reg = registry_for(truth);
  MITables tables = init_mi_tables(reg);
  SampleCounts samples(truth.actions.width());
  samples.add_series(truth, 0, truth.horizon());
  update_mi_table(tables.front(), samples);

  Json doc;
  doc["alarm_threshold"] = cfg.detection.alarm_threshold;
  Json scores = Json::object();
  SuspicionLedger ledger;
  for (auto& o : cfg.observers) {
    if (o.actions.empty()) o.actions = truth.actions.names;
    for (const auto& a : o.actions) ledger.note_observation(o.id, truth.rule, a, tables);
    scores[o.id] = ledger.score(o.id, truth.rule);
  }
  doc["scores"] = std::move(scores);
  doc["flagged"] = classify_observers(ledger, cfg.detection);
  if (!c.out.empty()) {
    ensure_dir(c.out);
    write_text_file(join(c.out, "mi_table.json"), to_json(tables.front()).dump(2) + "\n");
    write_text_file(join(c.out, "detection.json"), doc.dump(2) + "\n");
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

struct MitigateArgs {
  std::string series;
  std::string records;
  std::string method = "None";
  double magnitude = 0.0;
  Tick delay = 0;
  std::string actions;
  Tick cadence = 1;
};

int cmd_mitigate(const Common& c, const MitigateArgs& m) {
  const ExperimentConfig cfg = resolve_config(c);
  const TickSeries truth = load_series(m.series);
  const Registry reg = registry_for(truth);
  const AdaptationRule& rule = reg.rules.front();
  const RecordLog log = m.records.empty() ? change_points(truth) : load_records(m.records, reg);

  const auto first = truth.actions.row(0);
  MitigationState st(rule, ActionVector(first.begin(), first.end()), cfg.seed);
  std::size_t next = 0;
  for (Tick t = 0; t < truth.horizon(); ++t) {
    const auto row = truth.actions.row(t);
    if (next < log.size() && log[next].t == t) {
      st.on_adaptation_event(log[next++]);
    } else if (t > 0 && !std::equal(row.begin(), row.end(), truth.actions.row(t - 1).begin())) {
      st.on_value_change(t, ActionVector(row.begin(), row.end()));
    }
  }
  st.apply({method_kind_from_string(m.method), m.magnitude});
  if (m.delay > 0) st.apply(MitigationMethod::delay(m.delay));
  const auto actions = m.actions.empty() ? rule.actions : split_list(m.actions);
  const ActionTimeline served = observe(st, actions, 0, truth.horizon(), m.cadence);
  if (!c.out.empty()) save_timeline(c.out, served);
  std::cout << "effective_mi " << effective_mi(served, truth) << " unmitigated "
            << effective_mi(project(truth.actions, actions), truth) << '\n';
  return 0;
}

int cmd_experiment(const Common& c) {
  const ExperimentRun run = run_experiment(resolve_config(c));
  if (!c.out.empty()) write_experiment(run, c.out);
  for (const auto& t : run.report.timings) std::cerr << "stage " << t.stage << ' ' << t.seconds << " s\n";
  std::cout << summarize_report(to_json(run.report).dump());
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis_name, const std::string& values) {
  ExperimentConfig cfg = resolve_config(c);
  const SweepAxis axis = sweep_axis_from_string(axis_name);
  std::vector<double> points;
  if (!values.empty()) {
    points = parse_values(values);
  } else if (axis == SweepAxis::kThreshold) {
    points = cfg.sweep.thresholds;
  } else if (axis == SweepAxis::kMaskP) {
    points = cfg.sweep.mask_ps;
  } else {
    points.assign(cfg.sweep.suppress_ks.begin(), cfg.sweep.suppress_ks.end());
  }
  const std::string csv = sweep_csv(axis, run_sweep(cfg, axis, points));
  if (!c.out.empty()) {
    ensure_dir(c.out);
    write_text_file(join(c.out, "sweep_" + axis_name + ".csv"), csv);
  }
  std::cout << csv;
  return 0;
}

int cmd_report(const std::string& path) {
  std::cout << summarize_report(read_text_file(path));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context leakage through observable adaptations: simulate, attack, detect, mitigate"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", common.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "seed (overrides the config)");
    sub->add_option("--days", common.days, "simulated days (overrides the config)");
    auto* out = sub->add_option("--out", common.out, "output path");
    if (needs_out) out->required();
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a scenario and write its traces");
  add_common(simulate_cmd, true);

  AttackArgs attack_args;
  auto* attack_cmd = app.add_subcommand("attack", "cluster observed actions and score against the truth");
  add_common(attack_cmd, false);
  attack_cmd->add_option("--series", attack_args.series, "truth series CSV")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--observed", attack_args.observed, "observed timeline CSV (default: true actions)")
      ->check(CLI::ExistingFile);
  attack_cmd->add_option("--actions", attack_args.actions, "comma-separated action subset");
  attack_cmd->add_flag("--no-feature-selection", attack_args.no_selection, "cluster on every feature");
  attack_cmd->add_option("--restarts", attack_args.restarts, "k-means restarts")->check(CLI::PositiveNumber);

  std::string detect_series;
  auto* detect_cmd = app.add_subcommand("detect", "build the MI table and score the configured observers");
  add_common(detect_cmd, false);
  detect_cmd->add_option("--series", detect_series, "truth series CSV")->required()->check(CLI::ExistingFile);

  MitigateArgs mitigate_args;
  auto* mitigate_cmd = app.add_subcommand("mitigate", "serve a series through one mitigation method");
  add_common(mitigate_cmd, false);
  mitigate_cmd->add_option("--series", mitigate_args.series, "truth series CSV")->required()->check(CLI::ExistingFile);
  mitigate_cmd->add_option("--records", mitigate_args.records, "adaptation records JSONL")->check(CLI::ExistingFile);
  mitigate_cmd->add_option("--method", mitigate_args.method, "None|Suppression|RowMask|FeatureMask");
  mitigate_cmd->add_option("--magnitude", mitigate_args.magnitude, "k or p");
  mitigate_cmd->add_option("--delay", mitigate_args.delay, "delay in ticks")->check(CLI::NonNegativeNumber);
  mitigate_cmd->add_option("--actions", mitigate_args.actions, "comma-separated queried actions");
  mitigate_cmd->add_option("--cadence", mitigate_args.cadence, "ticks between reads")->check(CLI::PositiveNumber);

  auto* experiment_cmd = app.add_subcommand("experiment", "run the full simulate-attack-detect-mitigate loop");
  add_common(experiment_cmd, false);

  std::string axis;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter and write a CSV curve");
  add_common(sweep_cmd, false);
  sweep_cmd->add_option("--axis", axis, "threshold|mask_p|suppress_k")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values");

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "summarize a report.json");
  report_cmd->add_option("report", report_path, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(common);
    if (*attack_cmd) return cmd_attack(common, attack_args);
    if (*detect_cmd) return cmd_detect(common, detect_series);
    if (*mitigate_cmd) return cmd_mitigate(common, mitigate_args);
    if (*experiment_cmd) return cmd_experiment(common);
    if (*sweep_cmd) return cmd_sweep(common, axis, values);
    if (*report_cmd) return cmd_report(report_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
