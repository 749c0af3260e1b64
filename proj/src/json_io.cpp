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

#include "adaptleak/json_io.hpp"

#include <algorithm>

#include "adaptleak/error.hpp"

namespace adaptleak {
namespace {

[[noreturn]] void config_error(std::string_view where, const std::string& what) {
  throw Error(ErrorCode::kConfigError, std::string(where) + ": " + what);
}

template <typename T>
T get_as(const Json& j, const char* key, std::string_view where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(where, std::string("field '") + key + "': " + e.what());
  }
}

std::string_view day_name(DayType d) { return d == DayType::kWeekday ? "weekday" : "weekend"; }

DayType day_from(const std::string& s) {
  if (s == "weekday") return DayType::kWeekday;
  if (s == "weekend") return DayType::kWeekend;
  config_error("schedule", "day must be weekday or weekend, got '" + s + "'");
}

}  // namespace

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) config_error(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(where, "unknown key '" + key + "'");
    }
  }
}

Json parse_json(std::string_view text, std::string_view where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    config_error(where, e.what());
  }
}

Json to_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  j["registry"] = serialize_registry(sc.registry);
  j["contexts"] = sc.contexts;
  j["dwell_model"] = sc.dwell_model == DwellModel::kGeometric ? "geometric" : "fixed";
  Json schedule = Json::array();
  for (const auto& b : sc.schedule) {
    schedule.push_back({{"day", day_name(b.day)},
                        {"start_hour", b.start_hour},
                        {"end_hour", b.end_hour},
                        {"transition", b.transition},
                        {"mean_dwell", b.mean_dwell}});
  }
  j["schedule"] = std::move(schedule);
  j["policy"] = sc.policy;
  j["initial_levels"] = sc.initial_levels;
  j["action_ranges"] = sc.action_ranges;
  j["override_rate"] = sc.override_rate;
  j["overridable"] = sc.overridable;
  Json exo = Json::array();
  for (const auto& e : sc.exogenous) {
    exo.push_back({{"action", e.action},
                   {"base", e.base},
                   {"amplitude", e.amplitude},
                   {"step_minutes", e.step_minutes},
                   {"phase", e.phase}});
  }
  j["exogenous"] = std::move(exo);
  j["coarse_view"] = sc.coarse_view;
  j["cloud_features"] = sc.cloud_features;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  constexpr std::string_view where = "scenario";
  require_keys(j,
               {"name", "registry", "contexts", "dwell_model", "schedule", "policy", "initial_levels",
                "action_ranges", "override_rate", "overridable", "exogenous", "coarse_view", "cloud_features"},
               where);
  Scenario sc;
  sc.name = j.value("name", std::string("inline"));
  sc.registry = parse_registry(get_as<std::string>(j, "registry", where));
  sc.contexts = get_as<std::vector<std::string>>(j, "contexts", where);
  const std::string dwell = j.value("dwell_model", std::string("geometric"));
  if (dwell == "geometric") {
    sc.dwell_model = DwellModel::kGeometric;
  } else if (dwell == "fixed") {
    sc.dwell_model = DwellModel::kFixed;
  } else {
    config_error(where, "dwell_model must be geometric or fixed");
  }
  for (const auto& b : get_as<Json>(j, "schedule", where)) {
    require_keys(b, {"day", "start_hour", "end_hour", "transition", "mean_dwell"}, "schedule bucket");
    ScheduleBucket bucket;
    bucket.day = day_from(get_as<std::string>(b, "day", "schedule bucket"));
    bucket.start_hour = get_as<int>(b, "start_hour", "schedule bucket");
    bucket.end_hour = get_as<int>(b, "end_hour", "schedule bucket");
    bucket.transition = get_as<std::vector<std::vector<double>>>(b, "transition", "schedule bucket");
    bucket.mean_dwell = get_as<std::vector<double>>(b, "mean_dwell", "schedule bucket");
    sc.schedule.push_back(std::move(bucket));
  }
  sc.policy = get_as<std::map<std::string, std::map<std::string, int>>>(j, "policy", where);
  sc.initial_levels = get_as<std::map<std::string, int>>(j, "initial_levels", where);
  sc.action_ranges = get_as<std::map<std::string, int>>(j, "action_ranges", where);
  if (j.contains("override_rate")) sc.override_rate = get_as<double>(j, "override_rate", where);
  if (j.contains("overridable")) sc.overridable = get_as<std::vector<std::string>>(j, "overridable", where);
  if (j.contains("exogenous")) {
    for (const auto& e : j.at("exogenous")) {
      require_keys(e, {"action", "base", "amplitude", "step_minutes", "phase"}, "exogenous");
      ExogenousDrive d;
      d.action = get_as<std::string>(e, "action", "exogenous");
      d.base = get_as<int>(e, "base", "exogenous");
      d.amplitude = e.value("amplitude", 0);
      d.step_minutes = e.value("step_minutes", 60);
      d.phase = e.value("phase", 0.0);
      sc.exogenous.push_back(std::move(d));
    }
  }
  if (j.contains("coarse_view")) sc.coarse_view = get_as<std::map<std::string, std::string>>(j, "coarse_view", where);
  sc.cloud_features = j.value("cloud_features", false);
  validate(sc);
  return sc;
}

Json to_json(const AttackReport& r) {
  Json j;
  j["accuracy"] = r.accuracy;
  j["baseline"] = r.baseline;
  j["chosen_k"] = r.chosen_k;
  j["silhouette"] = r.silhouette;
  j["dominant_features"] = r.dominant_features;
  j["alphabet"] = r.alphabet;
  j["predicted"] = r.predicted;
  return j;
}

AttackReport attack_report_from_json(const Json& j) {
  try {
    AttackReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.baseline = j.at("baseline").get<double>();
    r.chosen_k = j.at("chosen_k").get<int>();
    r.silhouette = j.at("silhouette").get<double>();
    r.dominant_features = j.at("dominant_features").get<std::vector<std::string>>();
    r.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    r.predicted = j.at("predicted").get<std::vector<int>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("attack report: ") + e.what());
  }
}

Json to_json(const MITable& table) {
  Json rows = Json::array();
  for (ActionMask m = 1; m < table.values.size(); ++m) {
    rows.push_back({{"actions", mask_to_names(table.actions, m)}, {"score", table.values[m]}});
  }
  return {{"rule", table.rule_id}, {"actions", table.actions}, {"rows", std::move(rows)}};
}

Json to_json(const MitigationMethod& m) {
  return {{"method", to_string(m.kind)}, {"magnitude", m.magnitude}};
}

MitigationMethod method_from_json(const Json& j) {
  require_keys(j, {"method", "magnitude"}, "mitigation method");
  MitigationMethod m;
  m.kind = method_kind_from_string(get_as<std::string>(j, "method", "mitigation method"));
  m.magnitude = j.value("magnitude", 0.0);
  validate(m);
  return m;
}

Json to_json(const Ladder& ladder) {
  Json order = Json::array();
  for (auto k : ladder.order) order.push_back(to_string(k));
  return {{"suppression_ks", ladder.suppression_ks},
          {"mask_ps", ladder.mask_ps},
          {"window", ladder.window},
          {"order", std::move(order)}};
}

Ladder ladder_from_json(const Json& j) {
  require_keys(j, {"suppression_ks", "mask_ps", "window", "order"}, "ladder");
  Ladder ladder;
  if (j.contains("suppression_ks")) ladder.suppression_ks = get_as<std::vector<int>>(j, "suppression_ks", "ladder");
  if (j.contains("mask_ps")) ladder.mask_ps = get_as<std::vector<double>>(j, "mask_ps", "ladder");
  if (j.contains("window")) ladder.window = get_as<Tick>(j, "window", "ladder");
  if (j.contains("order")) {
    ladder.order.clear();
    for (const auto& name : get_as<std::vector<std::string>>(j, "order", "ladder")) {
      ladder.order.push_back(method_kind_from_string(name));
    }
  }
  validate(ladder);
  return ladder;
}

Json to_json(const AuditEvent& e) {
  return {{"t", e.t}, {"observer", e.observer}, {"method", e.method}, {"magnitude", e.magnitude}, {"event", e.event}};
}

}  // namespace adaptleak
