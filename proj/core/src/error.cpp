// Copyright 2026 The Affordlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "affordlab/error.hpp"

namespace affordlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownAffordance: return "UnknownAffordance";
    case ErrorCode::kUnknownConcept: return "UnknownConcept";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kEmptyConceptSet: return "EmptyConceptSet";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInsufficientPairs: return "InsufficientPairs";
    case ErrorCode::kCacheMismatch: return "CacheMismatch";
    case ErrorCode::kNoCaptionsFound: return "NoCaptionsFound";
    case ErrorCode::kScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::kClientError: return "ClientError";
    case ErrorCode::kDegenerateStep: return "DegenerateStep";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kNotJson: return "NotJson";
    case ErrorCode::kJudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace affordlab
