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

#include "adaptleak/error.hpp"

namespace adaptleak {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kEmptyContextList: return "EmptyContextList";
    case ErrorCode::kEmptyActionList: return "EmptyActionList";
    case ErrorCode::kDuplicateActionAcrossRules: return "DuplicateActionAcrossRules";
    case ErrorCode::kContextActionOverlap: return "ContextActionOverlap";
    case ErrorCode::kTooManyActions: return "TooManyActions";
    case ErrorCode::kNonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::kWrongActionSet: return "WrongActionSet";
    case ErrorCode::kRecordBeyondHorizon: return "RecordBeyondHorizon";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kProfileCountOutOfRange: return "ProfileCountOutOfRange";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kNotADistribution: return "NotADistribution";
    case ErrorCode::kEmptyHistogram: return "EmptyHistogram";
    case ErrorCode::kNotAProtectedGetter: return "NotAProtectedGetter";
    case ErrorCode::kDegeneratePopulation: return "DegeneratePopulation";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kSingleCluster: return "SingleCluster";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace adaptleak
