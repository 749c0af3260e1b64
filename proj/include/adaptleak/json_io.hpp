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

#include <initializer_list>
#include <string>
#include <string_view>

#include "adaptleak/attacker.hpp"
#include "adaptleak/infodetect.hpp"
#include "adaptleak/mitigation.hpp"
#include "adaptleak/scenario.hpp"
#include "json.hpp"

namespace adaptleak {

using Json = nlohmann::ordered_json;

/// Throws ConfigError naming `where` if `j` is not an object or carries a key
/// outside `allowed`.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

/// Throws ConfigError when the document does not parse.
Json parse_json(std::string_view text, std::string_view where);

Json to_json(const Scenario& sc);
/// Inverse of to_json; the registry travels as its XML text. Validates.
Scenario scenario_from_json(const Json& j);

Json to_json(const AttackReport& r);
/// Throws SchemaMismatch on missing or mistyped fields.
AttackReport attack_report_from_json(const Json& j);

Json to_json(const MITable& table);
Json to_json(const MitigationMethod& m);
MitigationMethod method_from_json(const Json& j);
Json to_json(const Ladder& ladder);
Ladder ladder_from_json(const Json& j);
Json to_json(const AuditEvent& e);

}  // namespace adaptleak
