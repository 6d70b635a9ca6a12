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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affordlab {

enum class ErrorCode {
  kParseError,
  kDanglingReference,
  kDuplicateName,
  kUnknownAffordance,
  kUnknownConcept,
  kMissingEmbedding,
  kEmptyConceptSet,
  kInvalidArgument,
  kInsufficientPairs,
  kCacheMismatch,
  kNoCaptionsFound,
  kScorerUnavailable,
  kClientError,
  kDegenerateStep,
  kNonFiniteLoss,
  kMissingKey,
  kOutOfRange,
  kNotJson,
  kJudgeUnavailable,
  kEmptyInput,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// All pipeline failures surface as this exception. `subject` names the
// offending id, path or raw text when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace affordlab
