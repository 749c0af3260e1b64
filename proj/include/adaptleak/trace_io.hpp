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

#include <iosfwd>
#include <string>

#include "adaptleak/core.hpp"
#include "adaptleak/registry.hpp"

namespace adaptleak {

// Adaptation records as line-delimited JSON:
//   {"t":int,"rule":int,"context":"str","actions":{"Name":int,...}}
// Action keys are written in the rule's action order. Reading resolves the
// names against `reg` and rejects any unknown or missing field.
void write_records(std::ostream& out, const RecordLog& log, const Registry& reg);
RecordLog read_records(std::istream& in, const Registry& reg);
void save_records(const std::string& path, const RecordLog& log, const Registry& reg);
RecordLog load_records(const std::string& path, const Registry& reg);

// Tick series as CSV with header `t,context,<action names...>`.
void write_series(std::ostream& out, const TickSeries& series);
TickSeries read_series(std::istream& in, int rule = 0);
void save_series(const std::string& path, const TickSeries& series);
TickSeries load_series(const std::string& path, int rule = 0);

// Observer timelines (what a reader was served) as CSV `t,<action names...>`.
void write_timeline(std::ostream& out, const ActionTimeline& timeline);
ActionTimeline read_timeline(std::istream& in);
void save_timeline(const std::string& path, const ActionTimeline& timeline);
ActionTimeline load_timeline(const std::string& path);

/// Writes `content` to `path`, throwing IoFailure on error.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace adaptleak
