// Copyright 2026 The WeaverForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace weaverforge {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kEmptyAfterNormalize,
  kInsufficientStratum,
  kScorerFailure,
  kInvalidRequest,
  kBackendUnavailable,
  kBudgetExceeded,
  kTemplateError,
  kMissingExemplars,
  kDocTooShort,
  kParseFailure,
  kGroundingViolation,
  kNoCandidatePrinciples,
  kPerturbationRejected,
  kNonFiniteInput,
  kEmptyText,
  kEmptyIndex,
  kSampleRejected,
  kSelfPlay,
  kInvalidConfig,
  kStageFailed,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as Error. `detail` carries auxiliary
// payload such as the raw LLM transcript behind a ParseFailure, or the name
// of the starving stratum for InsufficientStratum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace weaverforge
