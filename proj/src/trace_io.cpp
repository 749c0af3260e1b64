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

#include "adaptleak/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "adaptleak/error.hpp"
#include "json.hpp"

namespace adaptleak {
namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  return in;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

long long parse_int(std::string_view cell, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "line " + std::to_string(line_no) + ": '" + std::string(cell) + "' is not an integer");
  }
  return v;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

void write_records(std::ostream& out, const RecordLog& log, const Registry& reg) {
  for (const auto& rec : log) {
    const AdaptationRule& rule = reg.rule(rec.rule);
    if (rec.actions.size() != rule.actions.size()) {
      throw Error(ErrorCode::kWrongActionSet, "record does not match its rule");
    }
    ordered_json j;
    j["t"] = rec.t;
    j["rule"] = rec.rule;
    j["context"] = rec.context;
    ordered_json actions = ordered_json::object();
    for (std::size_t i = 0; i < rule.actions.size(); ++i) actions[rule.actions[i]] = rec.actions[i];
    j["actions"] = std::move(actions);
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed");
}

RecordLog read_records(std::istream& in, const Registry& reg) {
  RecordLog log;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kSchemaMismatch, where() + "not a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "t" && key != "rule" && key != "context" && key != "actions") {
        throw Error(ErrorCode::kSchemaMismatch, where() + "unknown field '" + key + "'");
      }
    }
    if (!j.contains("t") || !j["t"].is_number_integer() || !j.contains("rule") ||
        !j["rule"].is_number_integer() || !j.contains("context") || !j["context"].is_string() ||
        !j.contains("actions") || !j["actions"].is_object()) {
      throw Error(ErrorCode::kSchemaMismatch, where() + "missing or mistyped field");
    }
    AdaptationRecord rec;
    rec.t = j["t"].get<Tick>();
    rec.rule = j["rule"].get<int>();
    rec.context = j["context"].get<std::string>();
    if (rec.rule < 0 || static_cast<std::size_t>(rec.rule) >= reg.rules.size()) {
      throw Error(ErrorCode::kSchemaMismatch, where() + "unknown rule id");
    }
    const AdaptationRule& rule = reg.rule(rec.rule);
    const auto& actions = j["actions"];
    if (actions.size() != rule.actions.size()) {
      throw Error(ErrorCode::kWrongActionSet, where() + "action set does not match the rule");
    }
    rec.actions.resize(rule.actions.size());
    for (std::size_t i = 0; i < rule.actions.size(); ++i) {
      auto it = actions.find(rule.actions[i]);
      if (it == actions.end() || !it->is_number_integer()) {
        throw Error(ErrorCode::kWrongActionSet, where() + "missing action " + rule.actions[i]);
      }
      rec.actions[i] = it->get<int>();
    }
    record_adaptation(log, std::move(rec), reg);
  }
  return log;
}

void save_records(const std::string& path, const RecordLog& log, const Registry& reg) {
  auto out = open_out(path);
  write_records(out, log, reg);
}

RecordLog load_records(const std::string& path, const Registry& reg) {
  auto in = open_in(path);
  return read_records(in, reg);
}

void write_series(std::ostream& out, const TickSeries& series) {
  out << "t,context";
  for (const auto& n : series.actions.names) out << ',' << n;
  out << '\n';
  for (Tick t = 0; t < series.horizon(); ++t) {
    out << t << ',' << series.context_at(t);
    for (int v : series.actions.row(t)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed");
}

TickSeries read_series(std::istream& in, int rule) {
  std::string line;
  if (!next_line(in, line)) throw Error(ErrorCode::kSchemaMismatch, "empty series file");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t" || header[1] != "context") {
    throw Error(ErrorCode::kSchemaMismatch, "series header must start with t,context");
  }
  TickSeries series;
  series.rule = rule;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (!is_method_id(header[i])) {
      throw Error(ErrorCode::kSchemaMismatch, "bad action column '" + std::string(header[i]) + "'");
    }
    series.actions.names.emplace_back(header[i]);
  }
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kSchemaMismatch, "line " + std::to_string(line_no) + ": wrong column count");
    }
    if (parse_int(cells[0], line_no) != series.horizon()) {
      throw Error(ErrorCode::kSchemaMismatch, "line " + std::to_string(line_no) + ": ticks must be 0,1,2,...");
    }
    if (cells[1].empty()) throw Error(ErrorCode::kSchemaMismatch, "empty context symbol");
    series.context.push_back(series.intern(std::string(cells[1])));
    for (std::size_t i = 2; i < cells.size(); ++i) {
      series.actions.levels.push_back(static_cast<int>(parse_int(cells[i], line_no)));
    }
  }
  return series;
}

void save_series(const std::string& path, const TickSeries& series) {
  auto out = open_out(path);
  write_series(out, series);
}

TickSeries load_series(const std::string& path, int rule) {
  auto in = open_in(path);
  return read_series(in, rule);
}

void write_timeline(std::ostream& out, const ActionTimeline& timeline) {
  out << 't';
  for (const auto& n : timeline.names) out << ',' << n;
  out << '\n';
  for (Tick t = 0; t < timeline.horizon(); ++t) {
    out << t;
    for (int v : timeline.row(t)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed");
}

ActionTimeline read_timeline(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw Error(ErrorCode::kSchemaMismatch, "empty timeline file");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t") {
    throw Error(ErrorCode::kSchemaMismatch, "timeline header must be t,<actions...>");
  }
  ActionTimeline timeline;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (!is_method_id(header[i])) {
      throw Error(ErrorCode::kSchemaMismatch, "bad action column '" + std::string(header[i]) + "'");
    }
    timeline.names.emplace_back(header[i]);
  }
  std::size_t line_no = 1;
  Tick expected = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kSchemaMismatch, "line " + std::to_string(line_no) + ": wrong column count");
    }
    if (parse_int(cells[0], line_no) != expected++) {
      throw Error(ErrorCode::kSchemaMismatch, "line " + std::to_string(line_no) + ": ticks must be 0,1,2,...");
    }
    for (std::size_t i = 1; i < cells.size(); ++i) {
      timeline.levels.push_back(static_cast<int>(parse_int(cells[i], line_no)));
    }
  }
  return timeline;
}

void save_timeline(const std::string& path, const ActionTimeline& timeline) {
  auto out = open_out(path);
  write_timeline(out, timeline);
}

ActionTimeline load_timeline(const std::string& path) {
  auto in = open_in(path);
  return read_timeline(in);
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace adaptleak
