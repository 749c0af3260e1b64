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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "adaptleak/error.hpp"
#include "adaptleak/rng.hpp"
#include "adaptleak/trace_io.hpp"

namespace adaptleak {
namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

template <typename T>
T field(const Json& j, const char* key, const T& fallback, std::string_view where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string(where) + ": field '" + key + "': " + e.what());
  }
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string method_label(const MitigationState* st) {
  if (st == nullptr) return "None";
  if (st->method().kind == MethodKind::kNone && st->delay() > 0) return "Delay";
  return std::string(to_string(st->method().kind));
}

double method_magnitude(const MitigationState* st) {
  if (st == nullptr) return 0.0;
  if (st->method().kind == MethodKind::kNone) return static_cast<double>(st->delay());
  return st->method().magnitude;
}

ActionMask mask_of(const AdaptationRule& rule, const std::vector<std::string>& actions) {
  ActionMask m = 0;
  for (const auto& a : actions) m |= ActionMask{1} << rule.action_index(a);
  return m;
}

MITable full_horizon_table(const Scenario& sc, const TickSeries& truth) {
  MITables tables = init_mi_tables(sc.registry);
  MITable table = std::move(tables.at(static_cast<std::size_t>(sc.rule().id)));
  SampleCounts samples(sc.rule().actions.size());
  samples.add_series(truth, 0, truth.horizon());
  update_mi_table(table, samples);
  return table;
}

std::vector<double> singleton_scores(const MITable& table) {
  std::vector<double> out;
  for (std::size_t a = 0; a < table.actions.size(); ++a) out.push_back(table.at(ActionMask{1} << a));
  return out;
}

// Labels and scores a population; the curve stays empty when one class is
// missing, since FP and FN are then undefined.
void score_population(const std::vector<PopulationMember>& pop, std::span<const double> thresholds,
                      std::vector<RatePoint>& curve) {
  std::map<std::string, double> scores;
  std::map<std::string, bool> malicious;
  for (const auto& m : pop) {
    scores[m.id] = m.score;
    malicious[m.id] = m.malicious;
  }
  try {
    curve = fp_fn_sweep(scores, malicious, thresholds);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegeneratePopulation) throw;
    curve.clear();
  }
}

// Runs `count` independent jobs over the configured worker count; results
// land in job order, so the output does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t count, F&& job) {
  const unsigned workers = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Scenario build_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  Scenario sc;
  if (spec.inline_scenario) {
    sc = scenario_from_json(*spec.inline_scenario);
  } else if (spec.preset == "phone") {
    sc = build_phone_preset(spec.profiles, seed);
  } else if (spec.preset == "smart_home") {
    sc = build_smart_home_preset(seed);
  } else {
    config_error("unknown scenario preset '" + spec.preset + "'");
  }
  if (spec.override_rate) sc.override_rate = *spec.override_rate;
  validate(sc);
  return sc;
}

ExperimentConfig config_from_json(const Json& j) {
  require_keys(j, {"scenario", "days", "seed", "observers", "detection", "mitigation", "attack", "population", "sweep"},
               "config");
  ExperimentConfig cfg;
  if (j.contains("scenario")) {
    const Json& s = j.at("scenario");
    require_keys(s, {"preset", "profiles", "override_rate", "inline"}, "scenario");
    cfg.scenario.preset = field<std::string>(s, "preset", cfg.scenario.preset, "scenario");
    cfg.scenario.profiles = field<int>(s, "profiles", cfg.scenario.profiles, "scenario");
    if (s.contains("override_rate")) cfg.scenario.override_rate = field<double>(s, "override_rate", 0.0, "scenario");
    if (s.contains("inline")) cfg.scenario.inline_scenario = s.at("inline");
  }
  cfg.days = field<int>(j, "days", cfg.days, "config");
  cfg.seed = field<std::uint64_t>(j, "seed", cfg.seed, "config");
  if (j.contains("observers")) {
    if (!j.at("observers").is_array()) config_error("config: observers must be an array");
    for (const auto& o : j.at("observers")) {
      require_keys(o, {"id", "actions", "cadence"}, "observer");
      ObserverSpec spec;
      spec.id = field<std::string>(o, "id", "", "observer");
      spec.actions = field<std::vector<std::string>>(o, "actions", {}, "observer");
      spec.cadence = field<Tick>(o, "cadence", 1, "observer");
      cfg.observers.push_back(std::move(spec));
    }
  }
  if (j.contains("detection")) {
    const Json& d = j.at("detection");
    require_keys(d, {"alarm_threshold", "refresh_every"}, "detection");
    cfg.detection.alarm_threshold = field<double>(d, "alarm_threshold", cfg.detection.alarm_threshold, "detection");
    cfg.detection.refresh_every = field<Tick>(d, "refresh_every", cfg.detection.refresh_every, "detection");
  }
  if (j.contains("mitigation")) {
    const Json& m = j.at("mitigation");
    require_keys(m, {"enabled", "auto_consent", "initial_method", "fixed", "delay", "ladder"}, "mitigation");
    cfg.mitigation.enabled = field<bool>(m, "enabled", cfg.mitigation.enabled, "mitigation");
    cfg.mitigation.auto_consent = field<bool>(m, "auto_consent", cfg.mitigation.auto_consent, "mitigation");
    if (m.contains("initial_method")) {
      cfg.mitigation.initial_method =
          method_kind_from_string(field<std::string>(m, "initial_method", "", "mitigation"));
    }
    if (m.contains("fixed")) cfg.mitigation.fixed = method_from_json(m.at("fixed"));
    cfg.mitigation.delay = field<bool>(m, "delay", cfg.mitigation.delay, "mitigation");
    if (m.contains("ladder")) cfg.mitigation.ladder = ladder_from_json(m.at("ladder"));
  }
  if (j.contains("attack")) {
    const Json& a = j.at("attack");
    require_keys(a, {"feature_selection", "restarts", "time_of_day", "day_of_week", "time_resolution"}, "attack");
    cfg.attack.feature_selection = field<bool>(a, "feature_selection", cfg.attack.feature_selection, "attack");
    cfg.attack.restarts = field<int>(a, "restarts", cfg.attack.restarts, "attack");
    cfg.attack.features.time_of_day = field<bool>(a, "time_of_day", false, "attack");
    cfg.attack.features.day_of_week = field<bool>(a, "day_of_week", false, "attack");
    cfg.attack.features.time_resolution = field<Tick>(a, "time_resolution", 60, "attack");
  }
  if (j.contains("population")) {
    const Json& p = j.at("population");
    require_keys(p, {"size", "max_subset", "malicious_margin"}, "population");
    cfg.population.size = field<int>(p, "size", cfg.population.size, "population");
    cfg.population.max_subset = field<int>(p, "max_subset", cfg.population.max_subset, "population");
    cfg.population.malicious_margin =
        field<double>(p, "malicious_margin", cfg.population.malicious_margin, "population");
  }
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    require_keys(s, {"thresholds", "mask_ps", "suppress_ks", "mask_method", "seeds"}, "sweep");
    cfg.sweep.thresholds = field<std::vector<double>>(s, "thresholds", cfg.sweep.thresholds, "sweep");
    cfg.sweep.mask_ps = field<std::vector<double>>(s, "mask_ps", cfg.sweep.mask_ps, "sweep");
    cfg.sweep.suppress_ks = field<std::vector<int>>(s, "suppress_ks", cfg.sweep.suppress_ks, "sweep");
    if (s.contains("mask_method")) {
      cfg.sweep.mask_method = method_kind_from_string(field<std::string>(s, "mask_method", "", "sweep"));
    }
    cfg.sweep.seeds = field<int>(s, "seeds", cfg.sweep.seeds, "sweep");
  }

  if (cfg.days < 1) config_error("config: days must be >= 1");
  if (!(cfg.detection.alarm_threshold >= 0.0 && cfg.detection.alarm_threshold <= 1.0)) {
    config_error("detection: alarm_threshold must lie in [0, 1]");
  }
  if (cfg.detection.refresh_every < 1) config_error("detection: refresh_every must be >= 1");
  if (cfg.attack.restarts < 1) config_error("attack: restarts must be >= 1");
  if (cfg.population.size < 0 || cfg.population.max_subset < 1) config_error("population: sizes must be positive");
  if (cfg.sweep.seeds < 1) config_error("sweep: seeds must be >= 1");
  if (cfg.sweep.mask_method != MethodKind::kRowMask && cfg.sweep.mask_method != MethodKind::kFeatureMask) {
    config_error("sweep: mask_method must be RowMask or FeatureMask");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return config_from_json(parse_json(text, path));
}

void resolve_observers(ExperimentConfig& cfg, const Scenario& sc) {
  if (cfg.days < 1) config_error("days must be >= 1");
  const AdaptationRule& rule = sc.rule();
  std::set<std::string> ids;
  for (auto& o : cfg.observers) {
    if (o.id.empty()) config_error("observer id must be non-empty");
    if (!ids.insert(o.id).second) config_error("duplicate observer id '" + o.id + "'");
    if (o.cadence < 1) config_error("observer " + o.id + ": cadence must be >= 1");
    if (o.actions.empty()) o.actions = rule.actions;
    std::set<std::string> seen;
    for (const auto& a : o.actions) {
      if (rule.action_index(a) < 0) config_error("observer " + o.id + " queries unknown action '" + a + "'");
      if (!seen.insert(a).second) config_error("observer " + o.id + " lists '" + a + "' twice");
    }
  }
}

ExperimentRun run_experiment(ExperimentConfig cfg) {
  Stopwatch clock;
  const Scenario sc = build_scenario(cfg.scenario, cfg.seed);
  resolve_observers(cfg, sc);
  validate(cfg.mitigation.ladder);
  if (cfg.mitigation.fixed) validate(*cfg.mitigation.fixed);
  if (cfg.mitigation.ladder.window < kMaxClusters) config_error("ladder window must cover at least 7 ticks");

  ExperimentRun run;
  ExperimentReport& report = run.report;
  report.scenario = sc.name;
  report.days = cfg.days;
  report.seed = cfg.seed;
  report.alarm_threshold = cfg.detection.alarm_threshold;

  run.registry = sc.registry;
  run.sim = simulate(sc, cfg.days, cfg.seed);
  report.timings.push_back({"simulate", clock.lap()});
  const TickSeries& truth = run.sim.series;
  const RecordLog& log = run.sim.log;
  const AdaptationRule& rule = sc.rule();
  const Tick horizon = truth.horizon();
  const Tick window = cfg.mitigation.ladder.window;
  const double threshold = cfg.detection.alarm_threshold;
  const bool controller = cfg.mitigation.enabled && !cfg.mitigation.fixed;

  Mediator mediator(rule, sc.initial_vector(), derive_seed(cfg.seed, hash_label("mediator")));
  MITables tables = init_mi_tables(sc.registry);
  MITable& table = tables.at(static_cast<std::size_t>(rule.id));
  SampleCounts samples(rule.actions.size());
  Tick sampled_to = 0;
  SuspicionLedger ledger;

  const std::size_t n_obs = cfg.observers.size();
  std::vector<std::vector<std::size_t>> columns(n_obs);
  std::vector<std::vector<int>> held(n_obs);
  run.served.resize(n_obs);
  report.observers.resize(n_obs);
  for (std::size_t o = 0; o < n_obs; ++o) {
    const ObserverSpec& spec = cfg.observers[o];
    for (const auto& a : spec.actions) columns[o].push_back(static_cast<std::size_t>(rule.action_index(a)));
    held[o].assign(spec.actions.size(), 0);
    run.served[o].names = spec.actions;
    run.served[o].levels.assign(static_cast<std::size_t>(horizon) * spec.actions.size(), 0);
    report.observers[o].id = spec.id;
    report.observers[o].actions = spec.actions;
    report.observers[o].cadence = spec.cadence;
    if (cfg.mitigation.enabled && cfg.mitigation.fixed) {
      MitigationState& st = mediator.flag(spec.id);
      st.apply(*cfg.mitigation.fixed);
      if (cfg.mitigation.delay) st.apply(MitigationMethod::delay(draw_delay(st.seed())));
    }
  }

  auto note = [&](std::size_t o, Tick t, const std::string& event) {
    const MitigationState* st = mediator.state(cfg.observers[o].id);
    AuditEvent e{t, cfg.observers[o].id, method_label(st), method_magnitude(st), event};
    if (event != "serve") report.observers[o].history.push_back(e);
    if (event != "exhausted") run.audit.push_back(std::move(e));
  };

  auto evaluate_window = [&](Tick t_end) {
    const Tick from = t_end - window;
    const int w = static_cast<int>(from / window);
    const TickSeries truth_w = slice(truth, from, t_end);
    for (std::size_t o = 0; o < n_obs; ++o) {
      const std::string& id = cfg.observers[o].id;
      const ActionTimeline served_w = slice(run.served[o], from, t_end);
      WindowResult r;
      r.window = w;
      r.t_end = t_end;
      r.suspicion = ledger.score(id, rule.id);
      r.effective_mi = effective_mi(served_w, truth_w);
      const AttackReport a =
          attack_pipeline(served_w, truth_w, derive_seed(cfg.seed, hash_label(id) + static_cast<std::uint64_t>(w)),
                          cfg.attack);
      r.accuracy = a.accuracy;
      r.baseline = a.baseline;
      if (MitigationState* st = mediator.state(id)) {
        r.method = st->method();
        r.delay = st->delay();
        note(o, t_end, "serve");
      }
      report.observers[o].windows.push_back(r);

      if (!controller) continue;
      if (MitigationState* st = mediator.state(id)) {
        const ControllerOutcome out = controller_step(*st, cfg.mitigation.ladder, r.effective_mi, threshold);
        if (out != ControllerOutcome::kHold) note(o, t_end, std::string(to_string(out)));
      } else if (r.suspicion > threshold && cfg.mitigation.auto_consent) {
        activate(mediator.flag(id), cfg.mitigation.ladder, cfg.mitigation.initial_method, cfg.mitigation.delay);
        note(o, t_end, "switch");
      }
    }
  };

  std::size_t next_record = 0;
  for (Tick t = 0; t <= horizon; ++t) {
    if (t > 0 && t % cfg.detection.refresh_every == 0) {
      samples.add_series(truth, sampled_to, t);
      sampled_to = t;
      update_mi_table(table, samples);
      ledger.refresh(tables);
    }
    if (t > 0 && t % window == 0) evaluate_window(t);
    if (t == horizon) break;

    const auto row = truth.actions.row(t);
    if (next_record < log.size() && log[next_record].t == t) {
      mediator.on_adaptation_event(log[next_record++]);
    } else if (t > 0 && !std::equal(row.begin(), row.end(), truth.actions.row(t - 1).begin())) {
      mediator.on_value_change(t, ActionVector(row.begin(), row.end()));
    }

    for (std::size_t o = 0; o < n_obs; ++o) {
      const ObserverSpec& spec = cfg.observers[o];
      if (t % spec.cadence == 0) {
        for (std::size_t c = 0; c < spec.actions.size(); ++c) {
          held[o][c] = mediator.get(spec.id, spec.actions[c], t);
          ledger.note_observation(spec.id, rule.id, spec.actions[c], tables);
        }
      }
      std::copy(held[o].begin(), held[o].end(), run.served[o].row(t).begin());
    }
  }
  report.timings.push_back({"mediate", clock.lap()});

  for (std::size_t o = 0; o < n_obs; ++o) {
    ObserverResult& r = report.observers[o];
    const std::uint64_t seed = derive_seed(cfg.seed, hash_label(r.id));
    const ActionTimeline unmitigated = project(truth.actions, r.actions);
    r.before = attack_pipeline(unmitigated, truth, seed, cfg.attack);
    r.after = attack_pipeline(run.served[o], truth, seed, cfg.attack);
    r.effective_mi_before = effective_mi(unmitigated, truth);
    r.effective_mi_after = effective_mi(run.served[o], truth);
    r.final_suspicion = ledger.score(r.id, rule.id);
    r.flagged = mediator.flagged(r.id);
  }
  report.timings.push_back({"attack", clock.lap()});

  if (cfg.population.size > 0) {
    const auto members =
        synthetic_population(rule, cfg.population, cfg.seed, singleton_scores(full_horizon_table(sc, truth)));
    report.population =
        evaluate_population(run.sim, sc, members, cfg.attack, cfg.population.malicious_margin, cfg.seed);
    score_population(report.population, cfg.sweep.thresholds, report.population_curve);
    report.timings.push_back({"population", clock.lap()});
  }
  return run;
}

Json to_json(const ExperimentReport& report) {
  auto attack_summary = [](const AttackReport& a) {
    Json j = to_json(a);
    j.erase("predicted");
    return j;
  };
  Json j;
  j["scenario"] = report.scenario;
  j["days"] = report.days;
  j["seed"] = report.seed;
  j["alarm_threshold"] = report.alarm_threshold;
  Json observers = Json::array();
  for (const auto& o : report.observers) {
    Json jo;
    jo["id"] = o.id;
    jo["actions"] = o.actions;
    jo["cadence"] = o.cadence;
    jo["flagged"] = o.flagged;
    jo["final_suspicion"] = o.final_suspicion;
    jo["effective_mi_before"] = o.effective_mi_before;
    jo["effective_mi_after"] = o.effective_mi_after;
    jo["before"] = attack_summary(o.before);
    jo["after"] = attack_summary(o.after);
    Json suspicion = Json::array();
    Json mi = Json::array();
    Json accuracy = Json::array();
    for (const auto& w : o.windows) {
      suspicion.push_back(w.suspicion);
      mi.push_back(w.effective_mi);
      accuracy.push_back(w.accuracy);
    }
    jo["suspicion_trajectory"] = std::move(suspicion);
    jo["effective_mi_trajectory"] = std::move(mi);
    jo["accuracy_trajectory"] = std::move(accuracy);
    Json history = Json::array();
    for (const auto& e : o.history) history.push_back(to_json(e));
    jo["mitigation_history"] = std::move(history);
    observers.push_back(std::move(jo));
  }
  j["observers"] = std::move(observers);
  if (!report.population.empty()) {
    Json pop = Json::array();
    for (const auto& m : report.population) {
      pop.push_back({{"id", m.id},
                     {"actions", m.actions},
                     {"score", m.score},
                     {"accuracy", m.accuracy},
                     {"baseline", m.baseline},
                     {"malicious", m.malicious}});
    }
    j["population"] = std::move(pop);
    Json curve = Json::array();
    for (const auto& p : report.population_curve) {
      curve.push_back({{"threshold", p.threshold}, {"false_positive", p.false_positive},
                       {"false_negative", p.false_negative}});
    }
    j["fp_fn_curve"] = std::move(curve);
  }
  return j;
}

std::string results_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "observer,window,t_end,suspicion,effective_mi,accuracy,baseline,method,magnitude,delay\n";
  for (const auto& o : report.observers) {
    for (const auto& w : o.windows) {
      out << o.id << ',' << w.window << ',' << w.t_end << ',' << fixed6(w.suspicion) << ','
          << fixed6(w.effective_mi) << ',' << fixed6(w.accuracy) << ',' << fixed6(w.baseline) << ','
          << to_string(w.method.kind) << ',' << fixed6(w.method.magnitude) << ',' << w.delay << '\n';
    }
  }
  return out.str();
}

void write_experiment(const ExperimentRun& run, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  write_text_file((dir / "report.json").string(), to_json(run.report).dump(2) + "\n");
  write_text_file((dir / "results.csv").string(), results_csv(run.report));

  save_records((dir / "trace.jsonl").string(), run.sim.log, run.registry);

  std::string audit;
  for (const auto& e : run.audit) audit += to_json(e).dump() + "\n";
  write_text_file((dir / "audit.jsonl").string(), audit);
  save_series((dir / "truth.csv").string(), run.sim.series);
}

std::vector<ObserverSpec> synthetic_population(const AdaptationRule& rule, const PopulationConfig& pop,
                                               std::uint64_t seed, std::span<const double> singleton_scores) {
  const std::size_t n = rule.actions.size();
  std::vector<std::size_t> everything(n);
  for (std::size_t a = 0; a < n; ++a) everything[a] = a;
  // The quieter half of the actions, least informative first.
  std::vector<std::size_t> quiet = everything;
  if (singleton_scores.size() == n) {
    std::stable_sort(quiet.begin(), quiet.end(),
                     [&](std::size_t a, std::size_t b) { return singleton_scores[a] < singleton_scores[b]; });
    quiet.resize(std::max<std::size_t>((n + 1) / 2, std::min<std::size_t>(pop.max_subset, n)));
  }
  std::vector<ObserverSpec> members;
  for (int i = 0; i < pop.size; ++i) {
    std::vector<std::size_t> idx = i % 2 == 1 ? quiet : everything;
    const std::size_t m = idx.size();
    const std::size_t size = std::min<std::size_t>(1 + static_cast<std::size_t>(i % pop.max_subset), m);
    // Partial Fisher-Yates with stateless draws keeps the population
    // independent of the standard library's shuffle.
    const std::uint64_t s = derive_seed(seed, hash_label("population"));
    for (std::size_t k = 0; k < size; ++k) {
      const auto pick = k + static_cast<std::size_t>(keyed_uniform(s, static_cast<std::uint64_t>(i), k) *
                                                     static_cast<double>(m - k));
      std::swap(idx[k], idx[pick]);
    }
    std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(chosen.begin(), chosen.end());
    ObserverSpec spec;
    char id[16];
    std::snprintf(id, sizeof id, "obs%02d", i);
    spec.id = id;
    for (auto a : chosen) spec.actions.push_back(rule.actions[a]);
    members.push_back(std::move(spec));
  }
  return members;
}

std::vector<PopulationMember> evaluate_population(const SimOutput& sim, const Scenario& sc,
                                                  const std::vector<ObserverSpec>& members,
                                                  const AttackOptions& attack, double malicious_margin,
                                                  std::uint64_t seed) {
  const MITable table = full_horizon_table(sc, sim.series);
  std::vector<PopulationMember> out;
  for (const auto& spec : members) {
    PopulationMember m;
    m.id = spec.id;
    m.actions = spec.actions;
    m.score = table.at(mask_of(sc.rule(), spec.actions));
    const AttackReport a =
        attack_pipeline(project(sim.series.actions, spec.actions), sim.series, derive_seed(seed, hash_label(spec.id)),
                        attack);
    m.accuracy = a.accuracy;
    m.baseline = a.baseline;
    m.malicious = a.accuracy > a.baseline + malicious_margin;
    out.push_back(std::move(m));
  }
  return out;
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  if (name == "threshold") return SweepAxis::kThreshold;
  if (name == "mask_p") return SweepAxis::kMaskP;
  if (name == "suppress_k") return SweepAxis::kSuppressK;
  config_error("unknown sweep axis '" + std::string(name) + "' (threshold, mask_p or suppress_k)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kThreshold:
      return "threshold";
    case SweepAxis::kMaskP:
      return "mask_p";
    case SweepAxis::kSuppressK:
      return "suppress_k";
  }
  return "threshold";
}

unsigned sweep_threads() {
  const char* env = std::getenv("ADAPTLEAK_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) config_error("ADAPTLEAK_THREADS must be a positive integer");
  return static_cast<unsigned>(std::min<long>(v, 256));
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) config_error("sweep needs at least one axis value");
  const auto seeds = static_cast<std::size_t>(cfg.sweep.seeds);
  std::vector<SweepRow> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rows[i].value = values[i];

  if (axis == SweepAxis::kThreshold) {
    for (double v : values) {
      if (!(v >= 0.0 && v <= 1.0)) config_error("thresholds must lie in [0, 1]");
    }
    // Scores do not depend on the threshold, so each seed's population is
    // simulated once and classified at every threshold.
    std::vector<std::vector<RatePoint>> curves(seeds);
    parallel_for(seeds, [&](std::size_t s) {
      ExperimentConfig c = cfg;
      c.seed = cfg.seed + s;
      if (c.population.size == 0) c.population.size = 20;
      const Scenario sc = build_scenario(c.scenario, c.seed);
      const SimOutput sim = simulate(sc, c.days, c.seed);
      const auto members = synthetic_population(sc.rule(), c.population, c.seed,
                                                singleton_scores(full_horizon_table(sc, sim.series)));
      const auto pop = evaluate_population(sim, sc, members, c.attack, c.population.malicious_margin, c.seed);
      score_population(pop, values, curves[s]);
    });
    // Seeds whose population lacks one class carry no rates.
    std::size_t usable = 0;
    for (const auto& c : curves) usable += !c.empty();
    if (usable == 0) {
      throw Error(ErrorCode::kDegeneratePopulation, "no seed produced both malicious and benign observers");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      double fp = 0.0;
      double fn = 0.0;
      for (const auto& c : curves) {
        if (c.empty()) continue;
        fp += c[i].false_positive;
        fn += c[i].false_negative;
      }
      rows[i].false_positive = fp / static_cast<double>(usable);
      rows[i].false_negative = fn / static_cast<double>(usable);
    }
    return rows;
  }

  struct Point {
    double mi = 0.0;
    double accuracy = 0.0;
    double baseline = 0.0;
  };
  std::vector<Point> points(values.size() * seeds);
  parallel_for(points.size(), [&](std::size_t job) {
    const std::size_t i = job / seeds;
    const std::size_t s = job % seeds;
    ExperimentConfig c = cfg;
    c.seed = cfg.seed + s;
    c.population.size = 0;
    if (c.observers.empty()) c.observers.push_back({"observer", {}, 1});
    c.observers.resize(1);
    c.mitigation.enabled = true;
    c.mitigation.delay = false;
    c.mitigation.fixed = axis == SweepAxis::kMaskP
                             ? MitigationMethod{cfg.sweep.mask_method, values[i]}
                             : MitigationMethod::suppression(static_cast<int>(values[i]));
    if (axis == SweepAxis::kSuppressK && static_cast<double>(static_cast<int>(values[i])) != values[i]) {
      config_error("suppress_k values must be integers");
    }
    const ExperimentRun r = run_experiment(std::move(c));
    const ObserverResult& o = r.report.observers.front();
    points[job] = {o.effective_mi_after, o.after.accuracy, o.after.baseline};
  });
  for (std::size_t i = 0; i < values.size(); ++i) {
    Point mean;
    for (std::size_t s = 0; s < seeds; ++s) {
      mean.mi += points[i * seeds + s].mi;
      mean.accuracy += points[i * seeds + s].accuracy;
      mean.baseline += points[i * seeds + s].baseline;
    }
    rows[i].effective_mi = mean.mi / static_cast<double>(seeds);
    rows[i].accuracy = mean.accuracy / static_cast<double>(seeds);
    rows[i].baseline = mean.baseline / static_cast<double>(seeds);
  }
  return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  auto cell = [](const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); };
  std::ostringstream out;
  out << to_string(axis) << ",effective_mi,accuracy,baseline,false_positive,false_negative\n";
  for (const auto& r : rows) {
    out << fixed6(r.value) << ',' << cell(r.effective_mi) << ',' << cell(r.accuracy) << ',' << cell(r.baseline)
        << ',' << cell(r.false_positive) << ',' << cell(r.false_negative) << '\n';
  }
  return out.str();
}

std::string summarize_report(std::string_view report_json) {
  Json j;
  try {
    j = Json::parse(report_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    std::ostringstream out;
    out << "scenario " << j.at("scenario").get<std::string>() << ", " << j.at("days").get<int>() << " days, seed "
        << j.at("seed").get<std::uint64_t>() << ", alarm threshold " << fixed6(j.at("alarm_threshold").get<double>())
        << '\n';
    const Json& observers = j.at("observers");
    if (!observers.is_array()) throw Error(ErrorCode::kSchemaMismatch, "observers must be an array");
    if (observers.empty()) out << "no observers\n";
    for (const auto& o : observers) {
      const Json& before = o.at("before");
      const Json& after = o.at("after");
      out << "\nobserver " << o.at("id").get<std::string>() << " (" << o.at("actions").size()
          << " actions, polled every " << o.at("cadence").get<Tick>() << " ticks)\n";
      out << "  accuracy before " << fixed6(before.at("accuracy").get<double>()) << ", after "
          << fixed6(after.at("accuracy").get<double>()) << ", baseline " << fixed6(after.at("baseline").get<double>())
          << '\n';
      out << "  final suspicion " << fixed6(o.at("final_suspicion").get<double>())
          << (o.at("flagged").get<bool>() ? " (flagged)" : "") << '\n';
      const Json& history = o.at("mitigation_history");
      if (history.empty()) {
        out << "  mitigation: none\n";
      } else {
        for (const auto& e : history) {
          out << "  t=" << e.at("t").get<Tick>() << ' ' << e.at("event").get<std::string>() << " -> "
              << e.at("method").get<std::string>() << ' ' << e.at("magnitude").get<double>() << '\n';
        }
      }
    }
    if (j.contains("fp_fn_curve")) {
      out << "\nthreshold,false_positive,false_negative\n";
      for (const auto& p : j.at("fp_fn_curve")) {
        out << fixed6(p.at("threshold").get<double>()) << ',' << fixed6(p.at("false_positive").get<double>()) << ','
            << fixed6(p.at("false_negative").get<double>()) << '\n';
      }
    }
    return out.str();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("report schema: ") + e.what());
  }
}

}  // namespace adaptleak
