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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "adaptleak/attacker.hpp"
#include "adaptleak/error.hpp"
#include "adaptleak/harness.hpp"
#include "adaptleak/infodetect.hpp"
#include "adaptleak/json_io.hpp"
#include "adaptleak/mitigation.hpp"
#include "adaptleak/registry.hpp"
#include "adaptleak/scenario.hpp"

namespace py = pybind11;
using namespace adaptleak;

namespace {

// Rows of equal width into a row-major timeline.
ActionTimeline timeline_from_rows(const std::vector<std::string>& names, const std::vector<std::vector<int>>& rows) {
  ActionTimeline tl;
  tl.names = names;
  tl.levels.reserve(rows.size() * names.size());
  for (const auto& r : rows) {
    if (r.size() != names.size()) throw Error(ErrorCode::kLengthMismatch, "row width differs from the name list");
    tl.levels.insert(tl.levels.end(), r.begin(), r.end());
  }
  return tl;
}

TickSeries series_from(const std::vector<std::string>& alphabet, const std::vector<int>& contexts,
                       const std::vector<std::string>& names, const std::vector<std::vector<int>>& rows) {
  TickSeries s;
  s.alphabet = alphabet;
  s.context = contexts;
  for (int c : contexts) {
    if (c < 0 || static_cast<std::size_t>(c) >= alphabet.size()) {
      throw Error(ErrorCode::kLengthMismatch, "context index outside the alphabet");
    }
  }
  s.actions = timeline_from_rows(names, rows);
  if (s.actions.horizon() != s.horizon()) throw Error(ErrorCode::kLengthMismatch, "contexts and rows differ in length");
  return s;
}

std::vector<std::vector<int>> rows_of(const ActionTimeline& tl) {
  std::vector<std::vector<int>> rows;
  rows.reserve(static_cast<std::size_t>(tl.horizon()));
  for (Tick t = 0; t < tl.horizon(); ++t) rows.emplace_back(tl.row(t).begin(), tl.row(t).end());
  return rows;
}

py::dict series_dict(const TickSeries& s) {
  py::dict d;
  d["alphabet"] = s.alphabet;
  d["contexts"] = s.context;
  d["actions"] = s.actions.names;
  d["rows"] = rows_of(s.actions);
  return d;
}

py::dict registry_dict(const Registry& reg) {
  py::list rules;
  for (const auto& r : reg.rules) {
    py::dict d;
    d["id"] = r.id;
    d["contexts"] = r.contexts;
    d["actions"] = r.actions;
    rules.append(d);
  }
  py::dict out;
  out["rules"] = rules;
  return out;
}

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kTooFewRows, "empty matrix");
  std::vector<double> data;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw Error(ErrorCode::kLengthMismatch, "ragged matrix");
    data.insert(data.end(), r.begin(), r.end());
  }
  return make_matrix(rows.size(), rows.front().size(), std::move(data));
}

}  // namespace

PYBIND11_MODULE(_adaptleak, m) {
  m.doc() = "Context leakage through observable adaptations";

  static py::exception<Error> error_type(m, "AdaptLeakError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::reinterpret_borrow<py::object>(error_type.ptr());
      py::object exc = cls(std::string(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("parse_registry", [](const std::string& text) { return registry_dict(parse_registry(text)); },
        py::arg("text"));
  m.def("canonical_registry", [](const std::string& text) { return serialize_registry(parse_registry(text)); },
        py::arg("text"), "Parse and re-serialize in canonical form.");

  m.def("entropy", [](const std::vector<double>& p) { return entropy(p); }, py::arg("dist"));
  m.def(
      "mutual_information",
      [](const std::vector<int>& contexts, const std::vector<std::vector<int>>& tuples, bool normalized) {
        if (contexts.size() != tuples.size()) throw Error(ErrorCode::kLengthMismatch, "one tuple per context");
        JointHistogram h;
        for (std::size_t i = 0; i < contexts.size(); ++i) h.add(contexts[i], tuples[i]);
        return normalized ? normalized_mi(h) : mutual_information(h);
      },
      py::arg("contexts"), py::arg("tuples"), py::arg("normalized") = false);

  m.def(
      "simulate",
      [](const std::string& preset, int profiles, int days, std::uint64_t seed) {
        ScenarioSpec spec;
        spec.preset = preset;
        spec.profiles = profiles;
        const Scenario sc = build_scenario(spec, seed);
        return series_dict(simulate(sc, days, seed).series);
      },
      py::arg("preset") = "phone", py::arg("profiles") = 5, py::arg("days") = 28, py::arg("seed") = 1);

  m.def(
      "mi_table",
      [](const std::vector<std::string>& alphabet, const std::vector<int>& contexts,
         const std::vector<std::string>& actions, const std::vector<std::vector<int>>& rows) {
        const TickSeries s = series_from(alphabet, contexts, actions, rows);
        Registry reg;
        reg.rules.push_back({0, {"Context"}, actions});
        MITables tables = init_mi_tables(reg);
        SampleCounts samples(actions.size());
        samples.add_series(s, 0, s.horizon());
        update_mi_table(tables.front(), samples);
        return tables.front().values;
      },
      py::arg("alphabet"), py::arg("contexts"), py::arg("actions"), py::arg("rows"),
      "values[mask] for every action subset; slot 0 is the empty set.");

  m.def(
      "kmeans",
      [](const std::vector<std::vector<double>>& rows, int k, std::uint64_t seed, int restarts) {
        const ClusterModel cm = kmeans(matrix_from(rows), k, seed, restarts);
        py::dict d;
        d["assignments"] = cm.assignments;
        d["centroids"] = cm.centroids;
        d["inertia"] = cm.inertia;
        return d;
      },
      py::arg("rows"), py::arg("k"), py::arg("seed") = 1, py::arg("restarts") = 10);
  m.def(
      "silhouette",
      [](const std::vector<std::vector<double>>& rows, const std::vector<int>& assignments) {
        return silhouette(matrix_from(rows), assignments);
      },
      py::arg("rows"), py::arg("assignments"));

  m.def(
      "attack",
      [](const std::vector<std::string>& alphabet, const std::vector<int>& contexts,
         const std::vector<std::string>& actions, const std::vector<std::vector<int>>& observed, std::uint64_t seed,
         bool feature_selection) {
        const TickSeries truth = series_from(alphabet, contexts, actions, observed);
        AttackOptions opts;
        opts.feature_selection = feature_selection;
        const AttackReport r = attack_pipeline(truth.actions, truth, seed, opts);
        return to_json(r).dump();
      },
      py::arg("alphabet"), py::arg("contexts"), py::arg("actions"), py::arg("observed"), py::arg("seed") = 1,
      py::arg("feature_selection") = true, "Returns the attack report as JSON text.");

  py::class_<MitigationState>(m, "MitigationState")
      .def(py::init([](const std::vector<std::string>& actions, const std::vector<int>& initial, std::uint64_t seed) {
             return MitigationState(AdaptationRule{0, {"Context"}, actions}, initial, seed);
           }),
           py::arg("actions"), py::arg("initial"), py::arg("seed") = 1)
      .def(
          "on_adaptation_event",
          [](MitigationState& st, Tick t, const std::string& context, const std::vector<int>& actions) {
            st.on_adaptation_event({t, st.rule().id, context, actions});
          },
          py::arg("t"), py::arg("context"), py::arg("actions"))
      .def("on_value_change", &MitigationState::on_value_change, py::arg("t"), py::arg("actions"))
      .def(
          "apply",
          [](MitigationState& st, const std::string& method, double magnitude) {
            st.apply({method_kind_from_string(method), magnitude});
          },
          py::arg("method"), py::arg("magnitude") = 0.0)
      .def("get", py::overload_cast<std::string_view, Tick>(&MitigationState::mediate_get), py::arg("action"),
           py::arg("t"))
      .def_property_readonly("delay", &MitigationState::delay)
      .def_property_readonly("method", [](const MitigationState& st) {
        return py::make_tuple(std::string(to_string(st.method().kind)), st.method().magnitude);
      });

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir) {
        const ExperimentRun run = run_experiment(config_from_json(parse_json(config_json, "config")));
        if (!out_dir.empty()) write_experiment(run, out_dir);
        return to_json(run.report).dump();
      },
      py::arg("config_json"), py::arg("out_dir") = "", "Returns report.json text.");
  m.def("summarize_report", [](const std::string& text) { return summarize_report(text); }, py::arg("report_json"));
}
